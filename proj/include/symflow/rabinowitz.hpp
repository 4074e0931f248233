#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "symflow/errors.hpp"

namespace symflow::rabinowitz {

using Vec2 = Eigen::Vector2d;

// Unit circle in the plane with defining Hamiltonian H = |z|^2 - 1, smoothly
// cut off to a constant outside radius 2, and one-form lambda = (x dy - y dx)/2.
// This normalization makes X_H the Reeb field on the circle (X_H = 2 d/dtheta),
// so critical Lagrange multipliers sit at eta = pi k.
struct CircleModel {
    double shoulder_lo = 2.25;  // |z|^2 where the cutoff shoulder starts
    double shoulder_hi = 4.0;   // |z|^2 where H becomes constant (radius 2)

    double hamiltonian(const Vec2& z) const;
    Vec2 grad(const Vec2& z) const;
    Eigen::Matrix2d hess(const Vec2& z) const;
    Vec2 xh(const Vec2& z) const;  // Hamiltonian vector field J0 grad H

    double lambda_pairing(const Vec2& z, const Vec2& w) const;  // lambda_z(w)

    double c_h() const;                 // max |H|
    double c_delta(double delta) const;  // 2 sup_{U_delta} |lambda|
    bool in_shell(const Vec2& z, double delta) const;  // z in H^{-1}((-delta,delta))
};

// Closed N-sample loop in the plane with Lagrange multiplier eta.
struct DiscreteLoop {
    std::vector<Vec2> points;  // point N is identified with point 0
    double eta = 0;

    int n() const { return static_cast<int>(points.size()); }
    void validate() const;  // N >= 8, finite coordinates
};

// Loop derivative: 6th-order periodic central differences.
std::vector<Vec2> loop_derivative(const DiscreteLoop& loop);

// Trapezoidal action: mean of lambda(v)(dv/dt) minus eta * mean of H(v).
double action(const DiscreteLoop& loop, const CircleModel& model);

struct Gradient {
    std::vector<Vec2> loop;  // -J0 (dv/dt - eta X_H(v)) per sample
    double eta = 0;          // -mean H(v)
    double norm() const;     // sqrt(mean |loop|^2 + eta^2)
};

Gradient gradient(const DiscreteLoop& loop, const CircleModel& model);

struct CriticalSearch {
    DiscreteLoop loop;
    double residual = 0;
    int iterations = 0;
};

// Levenberg-Marquardt on the discrete critical-point equations; converges to
// |grad| < tol or throws SearchError carrying the last residual. On success
// the action-equals-multiplier identity |A - eta| < 10 tol is asserted.
CriticalSearch find_critical(const DiscreteLoop& start, const CircleModel& model,
                             double tol = 1e-9, int max_iter = 300);

struct BoundCheck {
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};

// In-shell multiplier estimate |eta| <= 2|A| + c_delta |grad A|; requires all
// samples in U_delta and delta <= 1/4 (the model's shell hypothesis zone).
BoundCheck eta_bound_check(const DiscreteLoop& loop, const CircleModel& model, double delta);

struct GradLowerBound {
    double grad_norm = 0;
    double bound = 0;  // delta / 2
    bool holds = false;
    bool crossing_diagnostic = false;  // loop straddles the shell: reported, not asserted
    double transverse_estimate = 0;    // mean |radial component of dv/dt|
};

GradLowerBound grad_lower_bound(const DiscreteLoop& loop, const CircleModel& model, double delta);

// ||eta||_inf <= c_M + c_H E / eps^2 along a flow line of energy E.
double flowline_eta_bound(double energy, double c_m, double eps, double c_h);
// Homotopy version (eps^2 c_M + c_H Delta) / (eps^2 - c_H delta); requires
// delta < eps^2 / c_H, else HypothesisError.
double homotopy_eta_bound(double delta_action, double c_m, double eps, double c_h, double delta);
// The constant produced by combining the shell estimate with the gradient
// threshold: c_M = 2 M + eps c_delta.
double combined_c_m(double m, double eps, double c_delta);

struct NocritEpsilon {
    double eps = 0;     // delta / (2 (2c + delta)), strictly below the printed threshold
    double margin = 0;  // -2 c eps + delta (1 - eps), always positive
};

NocritEpsilon nocrit_epsilon(double c, double delta);

// Exact-arithmetic twin over rationals (numerator/denominator pairs).
struct NocritEpsilonExact {
    long long eps_num = 0, eps_den = 1;
    bool below_threshold = false;  // eps < delta / (2c + delta)
    bool margin_positive = false;  // -2 c eps + delta (1 - eps) > 0
};

NocritEpsilonExact nocrit_epsilon_exact(long long c_num, long long c_den,
                                        long long delta_num, long long delta_den);

// Deterministic loop constructions shared by tests, suites and the CLI.
DiscreteLoop circle_loop(int k, int n, double radius = 1.0, double phase = 0.0, double eta = 0.0);
DiscreteLoop perturbed_orbit(int k, int n, double amplitude, std::uint64_t seed);

struct SuiteRow {
    int case_id = 0;
    double lhs = 0, rhs = 0;
    bool holds = false;
};

std::vector<SuiteRow> step1_suite(const CircleModel& model, int count, std::uint64_t seed,
                                  int n_samples, double delta);
std::vector<SuiteRow> step2_suite(const CircleModel& model, int count, std::uint64_t seed,
                                  int n_samples, double delta);

struct CriticalRow {
    int case_id = 0;
    int k = 0;
    double eta = 0, action_value = 0, residual = 0;
    bool eta_ok = false, action_ok = false;
};

std::vector<CriticalRow> critical_suite(const CircleModel& model, int starts_per_k,
                                        std::uint64_t seed, int n_samples, double tol);

struct FdRow {
    int case_id = 0;
    double rel_error = 0;
    bool ok = false;
};

// Directional finite differences of the action against the gradient pairing.
std::vector<FdRow> gradient_fd_suite(const CircleModel& model, int count, std::uint64_t seed,
                                     int n_samples, double rel_tol = 1e-6);

}  // namespace symflow::rabinowitz
