#pragma once

#include <span>

namespace devalign::stats {

double mean(std::span<const double> xs);

// Two-pass Pearson correlation, clamped to [-1, 1]. Throws LengthMismatch for
// unequal lengths, InvalidArgument for fewer than 2 points and
// DegenerateVariance when either series is constant.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) of Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

// 1 - SS_res / SS_tot. Throws DegenerateVariance when SS_tot == 0.
double r_squared(std::span<const double> observed, std::span<const double> predicted);

}  // namespace devalign::stats
