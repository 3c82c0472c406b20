#pragma once

#include <span>
#include <vector>

#include "tacpose/mesh.hpp"

namespace tacpose {

inline constexpr double kAdiThreshold = 0.02;
inline constexpr int kAucSteps = 100;
inline constexpr double kAdiZero = 1e-12;  // meters

double positional_error_cm(const Pose& estimate, const Pose& gt);

/// Mesh vertices, thinned to at most `count` by farthest-point order.
std::vector<Vec3> model_points(const TriMesh& mesh, std::size_t count = 512);

/// Mean over gt-posed points of the distance to the nearest estimate-posed point.
double adi(const Pose& estimate, const Pose& gt, std::span<const Vec3> points);
double adi_brute_force(const Pose& estimate, const Pose& gt, std::span<const Vec3> points);

/// Area under the accuracy curve [adi <= tau] for tau on kAucSteps uniform
/// intervals of [0, threshold] (trapezoid rule), in percent. ADI below
/// kAdiZero is taken as exactly 0.
double auc_of_adi(double adi_value, double threshold = kAdiThreshold);

/// With rotation_only the estimate takes the gt translation first.
double adi_auc(const Pose& estimate, const Pose& gt, std::span<const Vec3> points, bool rotation_only = false,
               double threshold = kAdiThreshold);
double adi_auc_brute_force(const Pose& estimate, const Pose& gt, std::span<const Vec3> points,
                           bool rotation_only = false, double threshold = kAdiThreshold);

}  // namespace tacpose
