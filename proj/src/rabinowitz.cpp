#include "symflow/rabinowitz.hpp"

#include <Eigen/Sparse>
#include <boost/rational.hpp>
#include <cmath>
#include <random>

namespace symflow::rabinowitz {

namespace {

constexpr double kPi = 3.14159265358979323846;

// C^2 radial profile: psi(u) = u - 1 up to the shoulder, then the slope is
// ramped to zero with a smoothstep so H is constant outside radius 2.
struct Profile {
    double a, b;
    double value(double u) const {
        if (u <= a) return u - 1.0;
        if (u >= b) return value_at_b();
        const double x = (u - a) / (b - a);
        // integral of 1 - (3x^2 - 2x^3)
        return (a - 1.0) + (b - a) * (x - x * x * x + 0.5 * x * x * x * x);
    }
    double slope(double u) const {
        if (u <= a) return 1.0;
        if (u >= b) return 0.0;
        const double x = (u - a) / (b - a);
        return 1.0 - (3 * x * x - 2 * x * x * x);
    }
    double curvature(double u) const {
        if (u <= a || u >= b) return 0.0;
        const double x = (u - a) / (b - a);
        return -(6 * x - 6 * x * x) / (b - a);
    }
    double value_at_b() const { return (a - 1.0) + 0.5 * (b - a); }
};

const double kCentral6[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};

Eigen::Matrix2d j0() {
    Eigen::Matrix2d j;
    j << 0, -1, 1, 0;
    return j;
}

}  // namespace

double CircleModel::hamiltonian(const Vec2& z) const {
    return Profile{shoulder_lo, shoulder_hi}.value(z.squaredNorm());
}

Vec2 CircleModel::grad(const Vec2& z) const {
    return 2.0 * Profile{shoulder_lo, shoulder_hi}.slope(z.squaredNorm()) * z;
}

Eigen::Matrix2d CircleModel::hess(const Vec2& z) const {
    const Profile p{shoulder_lo, shoulder_hi};
    const double u = z.squaredNorm();
    return 2.0 * p.slope(u) * Eigen::Matrix2d::Identity() + 4.0 * p.curvature(u) * z * z.transpose();
}

Vec2 CircleModel::xh(const Vec2& z) const { return j0() * grad(z); }

double CircleModel::lambda_pairing(const Vec2& z, const Vec2& w) const {
    return 0.5 * (z.x() * w.y() - z.y() * w.x());
}

double CircleModel::c_h() const {
    return std::max(1.0, Profile{shoulder_lo, shoulder_hi}.value_at_b());
}

double CircleModel::c_delta(double delta) const {
    // sup |lambda| over the shell is half the outer radius
    return std::sqrt(1.0 + delta);
}

bool CircleModel::in_shell(const Vec2& z, double delta) const {
    return std::abs(hamiltonian(z)) < delta;
}

void DiscreteLoop::validate() const {
    if (n() < 8) throw ValidationError("DiscreteLoop: need at least 8 samples");
    for (const Vec2& p : points)
        if (!p.allFinite()) throw ValidationError("DiscreteLoop: non-finite coordinate");
    if (!std::isfinite(eta)) throw ValidationError("DiscreteLoop: non-finite eta");
}

std::vector<Vec2> loop_derivative(const DiscreteLoop& loop) {
    loop.validate();
    const int n = loop.n();
    std::vector<Vec2> d(n, Vec2::Zero());
    for (int i = 0; i < n; ++i) {
        Vec2 acc = Vec2::Zero();
        for (int j = 1; j <= 3; ++j)
            acc += kCentral6[j - 1] * (loop.points[(i + j) % n] - loop.points[(i - j + n) % n]);
        d[i] = acc * static_cast<double>(n);
    }
    return d;
}

double action(const DiscreteLoop& loop, const CircleModel& model) {
    loop.validate();
    const auto dv = loop_derivative(loop);
    const int n = loop.n();
    double lam = 0, h = 0;
    for (int i = 0; i < n; ++i) {
        lam += model.lambda_pairing(loop.points[i], dv[i]);
        h += model.hamiltonian(loop.points[i]);
    }
    return (lam - loop.eta * h) / n;
}

Gradient gradient(const DiscreteLoop& loop, const CircleModel& model) {
    loop.validate();
    const auto dv = loop_derivative(loop);
    const int n = loop.n();
    Gradient g;
    g.loop.resize(n);
    double h = 0;
    const Eigen::Matrix2d j = j0();
    for (int i = 0; i < n; ++i) {
        g.loop[i] = -j * (dv[i] - loop.eta * model.xh(loop.points[i]));
        h += model.hamiltonian(loop.points[i]);
    }
    g.eta = -h / n;
    return g;
}

double Gradient::norm() const {
    double s = 0;
    for (const Vec2& v : loop) s += v.squaredNorm();
    return std::sqrt(s / static_cast<double>(loop.size()) + eta * eta);
}

namespace {

// Sparse Levenberg-Marquardt on G(v, eta) = grad A (weighted least squares).
struct LmSystem {
    const CircleModel& model;
    int n;

    Eigen::VectorXd pack(const DiscreteLoop& loop) const {
        Eigen::VectorXd u(2 * n + 1);
        for (int i = 0; i < n; ++i) u.segment<2>(2 * i) = loop.points[i];
        u[2 * n] = loop.eta;
        return u;
    }
    DiscreteLoop unpack(const Eigen::VectorXd& u) const {
        DiscreteLoop loop;
        loop.points.resize(n);
        for (int i = 0; i < n; ++i) loop.points[i] = u.segment<2>(2 * i);
        loop.eta = u[2 * n];
        return loop;
    }

    Eigen::VectorXd residual(const DiscreteLoop& loop) const {
        const Gradient g = gradient(loop, model);
        Eigen::VectorXd r(2 * n + 1);
        for (int i = 0; i < n; ++i) r.segment<2>(2 * i) = g.loop[i];
        r[2 * n] = g.eta;
        return r;
    }

    Eigen::SparseMatrix<double> jacobian(const DiscreteLoop& loop) const {
        const Eigen::Matrix2d j = j0();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n) * 24);
        for (int i = 0; i < n; ++i) {
            // stencil part of -J0 D v
            for (int s = 1; s <= 3; ++s) {
                const double c = kCentral6[s - 1] * n;
                for (int r = 0; r < 2; ++r)
                    for (int cc = 0; cc < 2; ++cc) {
                        if (j(r, cc) == 0.0) continue;
                        trip.emplace_back(2 * i + r, 2 * ((i + s) % n) + cc, -c * j(r, cc));
                        trip.emplace_back(2 * i + r, 2 * ((i - s + n) % n) + cc, c * j(r, cc));
                    }
            }
            const Eigen::Matrix2d hd = -loop.eta * model.hess(loop.points[i]);
            for (int r = 0; r < 2; ++r)
                for (int cc = 0; cc < 2; ++cc)
                    if (hd(r, cc) != 0.0) trip.emplace_back(2 * i + r, 2 * i + cc, hd(r, cc));
            const Vec2 gh = model.grad(loop.points[i]);
            trip.emplace_back(2 * i, 2 * n, -gh.x());
            trip.emplace_back(2 * i + 1, 2 * n, -gh.y());
            trip.emplace_back(2 * n, 2 * i, -gh.x() / n);
            trip.emplace_back(2 * n, 2 * i + 1, -gh.y() / n);
        }
        Eigen::SparseMatrix<double> jac(2 * n + 1, 2 * n + 1);
        jac.setFromTriplets(trip.begin(), trip.end());
        return jac;
    }

    double weighted_sq(const Eigen::VectorXd& r) const {
        return r.head(2 * n).squaredNorm() / n + r[2 * n] * r[2 * n];
    }
};

}  // namespace

CriticalSearch find_critical(const DiscreteLoop& start, const CircleModel& model,
                             double tol, int max_iter) {
    start.validate();
    if (tol <= 0) throw ValidationError("find_critical: tolerance must be positive");
    const LmSystem sys{model, start.n()};
    const int n = start.n();

    Eigen::VectorXd weights(2 * n + 1);
    weights.head(2 * n).setConstant(1.0 / n);
    weights[2 * n] = 1.0;

    DiscreteLoop cur = start;
    Eigen::VectorXd r = sys.residual(cur);
    double fcur = sys.weighted_sq(r);
    double mu = 1e-4;

    for (int it = 0; it < max_iter; ++it) {
        if (std::sqrt(fcur) < tol) {
            const double a = action(cur, model);
            if (std::abs(a - cur.eta) >= 10.0 * tol)
                throw SearchError("find_critical: converged point violates the action-multiplier identity");
            return {cur, std::sqrt(fcur), it};
        }
        const Eigen::SparseMatrix<double> jac = sys.jacobian(cur);
        const Eigen::SparseMatrix<double> jw = weights.asDiagonal() * jac;
        Eigen::SparseMatrix<double> normal = Eigen::SparseMatrix<double>(jac.transpose()) * jw;
        const Eigen::VectorXd rhs = -jac.transpose() * (weights.asDiagonal() * r);

        bool stepped = false;
        for (int tries = 0; tries < 25; ++tries) {
            Eigen::SparseMatrix<double> damped = normal;
            for (int i = 0; i < damped.rows(); ++i) damped.coeffRef(i, i) += mu;
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(damped);
            if (solver.info() != Eigen::Success) { mu *= 10; continue; }
            const Eigen::VectorXd d = solver.solve(rhs);
            const DiscreteLoop cand = sys.unpack(sys.pack(cur) + d);
            const Eigen::VectorXd rc = sys.residual(cand);
            const double fc = sys.weighted_sq(rc);
            if (fc < fcur) {
                cur = cand;
                r = rc;
                fcur = fc;
                mu = std::max(mu * 0.3, 1e-12);
                stepped = true;
                break;
            }
            mu *= 10;
        }
        if (!stepped)
            throw SearchError("find_critical: no descent step found; last residual " +
                              std::to_string(std::sqrt(fcur)));
    }
    throw SearchError("find_critical: iteration cap reached; last residual " +
                      std::to_string(std::sqrt(fcur)));
}

BoundCheck eta_bound_check(const DiscreteLoop& loop, const CircleModel& model, double delta) {
    loop.validate();
    if (delta <= 0 || delta > 0.25)
        throw PreconditionError("eta_bound_check: need 0 < delta <= 1/4 for the shell hypothesis");
    for (const Vec2& p : loop.points)
        if (!model.in_shell(p, delta))
            throw PreconditionError("eta_bound_check: loop leaves the shell U_delta (out-of-shell regime)");
    BoundCheck b;
    b.lhs = std::abs(loop.eta);
    b.rhs = 2.0 * std::abs(action(loop, model)) + model.c_delta(delta) * gradient(loop, model).norm();
    b.holds = b.lhs <= b.rhs + 1e-12;
    return b;
}

GradLowerBound grad_lower_bound(const DiscreteLoop& loop, const CircleModel& model, double delta) {
    loop.validate();
    if (delta <= 0) throw ValidationError("grad_lower_bound: delta must be positive");
    GradLowerBound out;
    out.bound = 0.5 * delta;
    out.grad_norm = gradient(loop, model).norm();

    bool any_pos = false, any_neg = false, any_inside = false;
    for (const Vec2& p : loop.points) {
        const double h = model.hamiltonian(p);
        if (std::abs(h) < 0.5 * delta) any_inside = true;
        else if (h > 0) any_pos = true;
        else any_neg = true;
    }
    if (any_inside || (any_pos && any_neg)) {
        out.crossing_diagnostic = true;
        const auto dv = loop_derivative(loop);
        double acc = 0;
        for (int i = 0; i < loop.n(); ++i)
            acc += std::abs(loop.points[i].normalized().dot(dv[i]));
        out.transverse_estimate = acc / loop.n();
        return out;
    }
    out.holds = out.grad_norm >= out.bound * (1.0 - 1e-12);
    return out;
}

double flowline_eta_bound(double energy, double c_m, double eps, double c_h) {
    if (eps <= 0) throw ValidationError("flowline_eta_bound: eps must be positive");
    if (energy < 0) throw ValidationError("flowline_eta_bound: energy must be nonnegative");
    return c_m + c_h * energy / (eps * eps);
}

double homotopy_eta_bound(double delta_action, double c_m, double eps, double c_h, double delta) {
    if (eps <= 0 || c_h <= 0) throw ValidationError("homotopy_eta_bound: eps and c_H must be positive");
    if (!(delta < eps * eps / c_h))
        throw HypothesisError("homotopy_eta_bound: requires delta < eps^2 / c_H");
    return (eps * eps * c_m + c_h * delta_action) / (eps * eps - c_h * delta);
}

double combined_c_m(double m, double eps, double c_delta) { return 2.0 * m + eps * c_delta; }

NocritEpsilon nocrit_epsilon(double c, double delta) {
    if (c <= 0 || delta <= 0) throw ValidationError("nocrit_epsilon: need c > 0 and delta > 0");
    NocritEpsilon out;
    out.eps = delta / (2.0 * (2.0 * c + delta));
    out.margin = -2.0 * c * out.eps + delta * (1.0 - out.eps);
    return out;
}

NocritEpsilonExact nocrit_epsilon_exact(long long c_num, long long c_den,
                                        long long delta_num, long long delta_den) {
    using Rat = boost::rational<long long>;
    if (c_den == 0 || delta_den == 0) throw ValidationError("nocrit_epsilon_exact: zero denominator");
    const Rat c(c_num, c_den), d(delta_num, delta_den);
    if (c <= 0 || d <= 0) throw ValidationError("nocrit_epsilon_exact: need c > 0 and delta > 0");
    const Rat eps = d / (2 * (2 * c + d));
    NocritEpsilonExact out;
    out.eps_num = eps.numerator();
    out.eps_den = eps.denominator();
    out.below_threshold = eps < d / (2 * c + d);
    out.margin_positive = -2 * c * eps + d * (1 - eps) > 0;
    return out;
}

DiscreteLoop circle_loop(int k, int n, double radius, double phase, double eta) {
    DiscreteLoop loop;
    loop.points.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        const double th = 2 * kPi * k * t + phase;
        loop.points[i] = radius * Vec2(std::cos(th), std::sin(th));
    }
    loop.eta = eta;
    return loop;
}

namespace {

// Smooth radial perturbation from a handful of Fourier modes, with the
// summed amplitude capped so the loop stays pointwise within |rho| <= amp.
std::vector<double> smooth_profile(int n, double amp, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int modes = 4;
    std::vector<double> a(modes), b(modes);
    double total = 0;
    for (int j = 0; j < modes; ++j) {
        a[j] = u(rng);
        b[j] = u(rng);
        total += std::hypot(a[j], b[j]);
    }
    const double scale = total > 0 ? amp / total : 0.0;
    std::vector<double> rho(n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        double v = 0;
        for (int j = 0; j < modes; ++j)
            v += a[j] * std::cos(2 * kPi * (j + 1) * t) + b[j] * std::sin(2 * kPi * (j + 1) * t);
        rho[i] = scale * v;
    }
    return rho;
}

}  // namespace

DiscreteLoop perturbed_orbit(int k, int n, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double phase = kPi * u(rng);
    DiscreteLoop loop = circle_loop(k, n, 1.0, phase, kPi * k + 0.2 * u(rng));
    const auto rho = smooth_profile(n, amplitude, rng);
    for (int i = 0; i < n; ++i) loop.points[i] *= 1.0 + rho[i];
    return loop;
}

std::vector<SuiteRow> step1_suite(const CircleModel& model, int count, std::uint64_t seed,
                                  int n_samples, double delta) {
    std::vector<SuiteRow> rows;
    const int ks[3] = {1, 2, -1};
    for (int c = 0; c < count; ++c) {
        const DiscreteLoop loop = perturbed_orbit(ks[c % 3], n_samples, delta / 4.0, seed + c);
        const BoundCheck b = eta_bound_check(loop, model, delta);
        rows.push_back({c, b.lhs, b.rhs, b.holds});
    }
    return rows;
}

std::vector<SuiteRow> step2_suite(const CircleModel& model, int count, std::uint64_t seed,
                                  int n_samples, double delta) {
    std::vector<SuiteRow> rows;
    for (int c = 0; c < count; ++c) {
        std::mt19937_64 rng(seed + c);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        // alternate between loops fully outside and fully inside the shell
        const bool outside = c % 2 == 0;
        const double base = outside ? std::sqrt(1.0 + 2.0 * delta) : std::sqrt(std::max(0.05, 1.0 - 2.0 * delta));
        const double cap = outside ? 0.05 : 0.1 * delta;
        DiscreteLoop loop = circle_loop(1 + c % 2, n_samples, base, kPi * u(rng), u(rng));
        const auto rho = smooth_profile(n_samples, cap, rng);
        for (int i = 0; i < n_samples; ++i) loop.points[i] *= 1.0 + rho[i];
        const GradLowerBound g = grad_lower_bound(loop, model, delta);
        if (g.crossing_diagnostic)
            throw PreconditionError("step2_suite: generated loop unexpectedly straddles the shell");
        rows.push_back({c, g.grad_norm, g.bound, g.holds});
    }
    return rows;
}

std::vector<CriticalRow> critical_suite(const CircleModel& model, int starts_per_k,
                                        std::uint64_t seed, int n_samples, double tol) {
    std::vector<CriticalRow> rows;
    const int ks[3] = {1, 2, -1};
    int case_id = 0;
    for (int k : ks) {
        for (int s = 0; s < starts_per_k; ++s) {
            const DiscreteLoop start = perturbed_orbit(k, n_samples, 0.02, seed + 7919 * k + s);
            const CriticalSearch res = find_critical(start, model, tol);
            CriticalRow row;
            row.case_id = case_id++;
            row.k = k;
            row.eta = res.loop.eta;
            row.action_value = action(res.loop, model);
            row.residual = res.residual;
            row.eta_ok = std::abs(row.eta - kPi * k) < 1e-6;
            row.action_ok = std::abs(row.action_value - row.eta) < 1e-5;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<FdRow> gradient_fd_suite(const CircleModel& model, int count, std::uint64_t seed,
                                     int n_samples, double rel_tol) {
    std::vector<FdRow> rows;
    for (int c = 0; c < count; ++c) {
        std::mt19937_64 rng(seed + c);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        DiscreteLoop loop = circle_loop(1, n_samples, 0.9 + 0.4 * std::abs(u(rng)), kPi * u(rng), u(rng));
        const auto rho = smooth_profile(n_samples, 0.2, rng);
        for (int i = 0; i < n_samples; ++i) loop.points[i] *= 1.0 + rho[i];

        DiscreteLoop dir = circle_loop(1, n_samples, 1.0, 0.0, u(rng));
        const auto da = smooth_profile(n_samples, 1.0, rng);
        const auto db = smooth_profile(n_samples, 1.0, rng);
        for (int i = 0; i < n_samples; ++i) dir.points[i] = Vec2(da[i], db[i]);

        const double eps = 1e-6;
        auto shifted = [&](double sgn) {
            DiscreteLoop l = loop;
            for (int i = 0; i < n_samples; ++i) l.points[i] += sgn * eps * dir.points[i];
            l.eta += sgn * eps * dir.eta;
            return l;
        };
        const double fd = (action(shifted(+1), model) - action(shifted(-1), model)) / (2 * eps);
        const Gradient g = gradient(loop, model);
        double pair = g.eta * dir.eta;
        for (int i = 0; i < n_samples; ++i) pair += g.loop[i].dot(dir.points[i]) / n_samples;
        const double denom = std::max({std::abs(fd), std::abs(pair), 1e-9});
        FdRow row;
        row.case_id = c;
        row.rel_error = std::abs(fd - pair) / denom;
        row.ok = row.rel_error <= rel_tol;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace symflow::rabinowitz
