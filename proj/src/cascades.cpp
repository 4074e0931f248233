#include "symflow/cascades.hpp"

#include <algorithm>
#include <cmath>

namespace symflow::cascades {

HalfInt signature_index(int ind_m, int dim) {
    if (ind_m < 0 || ind_m > dim)
        throw ValidationError("signature_index: Morse index out of range [0, dim]");
    return HalfInt{2 * static_cast<std::int64_t>(ind_m) - dim};
}

std::int64_t cascade_dimension(const EndpointIndex& x_minus, const EndpointIndex& x_plus,
                               const std::vector<ChainComponent>& components_chain,
                               DimFlavor flavor) {
    std::int64_t dim = 0;
    switch (flavor) {
        case DimFlavor::morse: {
            if (!x_minus.ind_m_f || !x_plus.ind_m_f)
                throw DataError("cascade_dimension: Morse flavor needs ind_m_f at both endpoints");
            dim = (*x_plus.ind_m_f + x_plus.ind_m_h) - (*x_minus.ind_m_f + x_minus.ind_m_h) - 1;
            break;
        }
        case DimFlavor::signature: {
            if (!x_minus.ind_m_f || !x_plus.ind_m_f || !x_minus.ambient_dim || !x_plus.ambient_dim)
                throw DataError("cascade_dimension: signature flavor needs ind_m_f and ambient_dim");
            if (*x_minus.ambient_dim != *x_plus.ambient_dim)
                throw DataError("cascade_dimension: endpoints disagree on the ambient dimension");
            const HalfInt sp = signature_index(*x_plus.ind_m_f + x_plus.ind_m_h, *x_plus.ambient_dim);
            const HalfInt sm = signature_index(*x_minus.ind_m_f + x_minus.ind_m_h, *x_minus.ambient_dim);
            const HalfInt d = sp - sm;
            if (!d.is_integer()) throw DataError("cascade_dimension: signature difference not integral");
            dim = d.as_integer() - 1;
            break;
        }
        case DimFlavor::floer: {
            if (!x_minus.cz || !x_plus.cz)
                throw DataError("cascade_dimension: Floer flavor needs Conley-Zehnder data");
            auto mu = [](const EndpointIndex& x) {
                return *x.cz + HalfInt{2 * static_cast<std::int64_t>(x.ind_m_h) - x.component_dim};
            };
            const HalfInt d = mu(x_plus) - mu(x_minus);
            if (!d.is_integer()) throw DataError("cascade_dimension: grading difference not integral");
            dim = d.as_integer() - 1;
            break;
        }
    }
    if (!components_chain.empty() && x_minus.ind_m_f && x_plus.ind_m_f) {
        // per-cascade sum; must telescope to the endpoint formula
        if (components_chain.front().ind_m_f != *x_minus.ind_m_f ||
            components_chain.back().ind_m_f != *x_plus.ind_m_f)
            throw DataError("cascade_dimension: chain endpoints disagree with generator data");
        std::int64_t chained = x_plus.ind_m_h - x_minus.ind_m_h - 1;
        for (std::size_t i = 1; i < components_chain.size(); ++i)
            chained += components_chain[i].ind_m_f - components_chain[i - 1].ind_m_f;
        if (flavor == DimFlavor::morse && chained != dim)
            throw DataError("cascade_dimension: chained sum does not telescope to the endpoint formula");
    }
    return dim;
}

void FlowModel::validate(double tol) const {
    const auto& comps = components();
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        for (const Vec& p : component_samples(static_cast<int>(ci), 64))
            if (grad_f(p).norm() > tol)
                throw ValidationError("FlowModel: gradient does not vanish on component " + comps[ci].id);
        for (const MorsePoint& mp : comps[ci].morse_points)
            if (grad_f(generator_point(mp.id)).norm() > tol)
                throw ValidationError("FlowModel: gradient does not vanish at declared critical point " + mp.id);
    }
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
    while (a > kPi) a -= 2 * kPi;
    while (a <= -kPi) a += 2 * kPi;
    return a;
}

// Round S^2 in R^3 with f = z^2: isolated maxima at the poles, minimum
// circle at the equator, h = x on the circle.
class S2ZsqModel final : public FlowModel {
public:
    S2ZsqModel() {
        comps_ = {
            {"equator", 1, 0, 0.0, {{"eq-hmax", 1}, {"eq-hmin", 0}}},
            {"north", 0, 2, 1.0, {{"north", 0}}},
            {"south", 0, 2, 1.0, {{"south", 0}}},
        };
    }

    std::string name() const override { return "s2-zsq"; }
    int ambient_dim() const override { return 2; }
    const std::vector<CriticalComponent>& components() const override { return comps_; }

    double f(const Vec& p) const override { return p[2] * p[2]; }

    Vec grad_f(const Vec& p) const override {
        Vec g(3);
        const double z = p[2];
        g << 0, 0, 2 * z;
        return g - (g.dot(p)) * p;  // tangential part on the unit sphere
    }

    Vec project(const Vec& p) const override { return p / p.norm(); }

    int component_of_generator(const std::string& id) const override {
        if (id == "north") return 1;
        if (id == "south") return 2;
        if (id == "eq-hmax" || id == "eq-hmin") return 0;
        throw ValidationError("s2-zsq: unknown generator " + id);
    }

    Vec generator_point(const std::string& id) const override {
        Vec p(3);
        if (id == "north") p << 0, 0, 1;
        else if (id == "south") p << 0, 0, -1;
        else if (id == "eq-hmax") p << 1, 0, 0;
        else if (id == "eq-hmin") p << -1, 0, 0;
        else throw ValidationError("s2-zsq: unknown generator " + id);
        return p;
    }

    bool near_component(int comp, const Vec& p, double tube) const override {
        if (comp == 0) return std::abs(p[2]) <= tube;
        const double zs = comp == 1 ? 1.0 : -1.0;
        return (p - (Vec(3) << 0, 0, zs).finished()).norm() <= tube;
    }

    Vec project_to_component(int comp, const Vec& p) const override {
        if (comp == 0) {
            Vec q(3);
            const double r = std::hypot(p[0], p[1]);
            q << p[0] / r, p[1] / r, 0;
            return q;
        }
        return generator_point(comp == 1 ? "north" : "south");
    }

    Vec h_flow_step(int comp, const Vec& p, double dt) const override {
        if (comp != 0) return p;  // points have no auxiliary flow
        // ascending flow of h = x on the circle: phi' = -sin(phi)
        auto rhs = [](double phi) { return -std::sin(phi); };
        double phi = std::atan2(p[1], p[0]);
        const double k1 = rhs(phi);
        const double k2 = rhs(phi + 0.5 * dt * k1);
        const double k3 = rhs(phi + 0.5 * dt * k2);
        const double k4 = rhs(phi + dt * k3);
        phi += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        Vec q(3);
        q << std::cos(phi), std::sin(phi), 0;
        return q;
    }

    double h_grad_norm(int comp, const Vec& p) const override {
        if (comp != 0) return 0.0;
        return std::abs(std::sin(std::atan2(p[1], p[0])));
    }

    double transverse_coordinate(const std::string& gen_id, const Vec& p) const override {
        const double phi = std::atan2(p[1], p[0]);
        if (gen_id == "eq-hmax") return wrap_angle(phi);
        if (gen_id == "eq-hmin") return wrap_angle(phi - kPi);
        throw ValidationError("s2-zsq: transverse coordinate only defined on the equator");
    }

    Vec shooting_point(const std::string& gen_id, double phi, double radius) const override {
        const int comp = component_of_generator(gen_id);
        if (comp == 0)
            throw PreconditionError("s2-zsq: shooting spheres are only provided around the isolated poles");
        Vec p(3);
        p << std::sin(radius) * std::cos(phi), std::sin(radius) * std::sin(phi),
            std::cos(radius) * (comp == 1 ? 1.0 : -1.0);
        return p;
    }

    std::vector<Vec> component_samples(int comp, int count) const override {
        std::vector<Vec> pts;
        if (comp != 0) {
            pts.push_back(generator_point(comp == 1 ? "north" : "south"));
            return pts;
        }
        for (int j = 0; j < count; ++j) {
            const double phi = 2 * kPi * j / count;
            Vec p(3);
            p << std::cos(phi), std::sin(phi), 0;
            pts.push_back(p);
        }
        return pts;
    }

    std::vector<Vec> h_unstable_seeds(const std::string& gen_id, double offset) const override {
        if (gen_id != "eq-hmax") return {};  // only the circle's maximum has descending directions
        std::vector<Vec> seeds;
        for (double sgn : {+1.0, -1.0}) {
            Vec p(3);
            p << std::cos(sgn * offset), std::sin(sgn * offset), 0;
            seeds.push_back(p);
        }
        return seeds;
    }

private:
    std::vector<CriticalComponent> comps_;
};

int ind_fh(const CriticalComponent& c, const MorsePoint& mp) { return c.ind_f + mp.ind_h; }

struct GenRef {
    const CriticalComponent* comp;
    const MorsePoint* point;
    int comp_idx;
};

GenRef find_generator(const FlowModel& model, const std::string& id) {
    const auto& comps = model.components();
    for (std::size_t ci = 0; ci < comps.size(); ++ci)
        for (const MorsePoint& mp : comps[ci].morse_points)
            if (mp.id == id) return {&comps[ci], &mp, static_cast<int>(ci)};
    throw ValidationError("count_cascades: unknown generator " + id);
}

// Descending -grad f trajectory until it enters the tube of some component;
// returns (component index, projected landing point).
std::pair<int, Vec> shoot_descending(const FlowModel& model, Vec p, const CascadeParams& par,
                                     int skip_comp) {
    const auto rhs = [&](const Vec& x) { return (-model.grad_f(x)).eval(); };
    for (long step = 0; step < par.max_steps; ++step) {
        for (std::size_t ci = 0; ci < model.components().size(); ++ci) {
            if (static_cast<int>(ci) == skip_comp) continue;
            if (model.near_component(static_cast<int>(ci), p, par.tube))
                return {static_cast<int>(ci), model.project_to_component(static_cast<int>(ci), p)};
        }
        const Vec k1 = rhs(p);
        const Vec k2 = rhs(model.project(p + 0.5 * par.step * k1));
        const Vec k3 = rhs(model.project(p + 0.5 * par.step * k2));
        const Vec k4 = rhs(model.project(p + par.step * k3));
        p = model.project(p + par.step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4));
    }
    throw CountUnreliableError("count_cascades: descending trajectory did not reach any component tube");
}

}  // namespace

std::unique_ptr<FlowModel> make_s2_zsq_model() { return std::make_unique<S2ZsqModel>(); }

CascadeCount count_cascades(const FlowModel& model, const std::string& x_minus,
                            const std::string& x_plus, const CascadeParams& params) {
    const GenRef lo = find_generator(model, x_minus);
    const GenRef hi = find_generator(model, x_plus);

    EndpointIndex em{lo.comp->ind_f, lo.point->ind_h, lo.comp->dim, std::nullopt, std::nullopt};
    EndpointIndex ep{hi.comp->ind_f, hi.point->ind_h, hi.comp->dim, std::nullopt, std::nullopt};
    if (cascade_dimension(em, ep, {}, DimFlavor::morse) != 0)
        throw PreconditionError("count_cascades: moduli dimension is nonzero for (" + x_minus + ", " +
                                x_plus + "); only rigid pairs are countable");

    CascadeCount out;

    if (lo.comp_idx == hi.comp_idx) {
        // zero cascades: ordinary Morse count of the auxiliary flow, shot
        // backwards from the upper generator
        const auto seeds = model.h_unstable_seeds(x_plus, params.sphere_radius);
        int count = 0;
        double param = -1.0;
        for (const Vec& seed : seeds) {
            param += 2.0;
            Vec p = seed;
            bool converged = false;
            for (long step = 0; step < params.max_steps; ++step) {
                p = model.h_flow_step(lo.comp_idx, p, -params.step);
                if (model.h_grad_norm(lo.comp_idx, p) < params.converge_tol) { converged = true; break; }
            }
            if (!converged)
                throw CountUnreliableError("count_cascades: auxiliary flow did not settle at a critical point");
            if ((p - model.generator_point(x_minus)).norm() < 1e-3) {
                ++count;
                out.trajectories.push_back(param);
            }
        }
        out.parity = count % 2;
        out.note = "zero-cascade Morse count";
        return out;
    }

    if (hi.comp->f_value <= lo.comp->f_value)
        throw PreconditionError("count_cascades: cascades must ascend from " + x_minus + " to " + x_plus);

    auto land_coord = [&](double phi) {
        const Vec p = model.shooting_point(x_plus, phi, params.sphere_radius);
        const auto [ci, landing] = shoot_descending(model, p, params, hi.comp_idx);
        return ci == lo.comp_idx ? model.transverse_coordinate(x_minus, landing)
                                 : std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<double> coord(params.shots);
    for (int j = 0; j < params.shots; ++j) coord[j] = land_coord(2 * kPi * j / params.shots);

    int count = 0;
    const double phi_step = 2 * kPi / params.shots;
    for (int j = 0; j < params.shots; ++j) {
        const int jn = (j + 1) % params.shots;
        const double a = coord[j], b = coord[jn];
        if (std::isnan(a) || std::isnan(b)) {
            if ((!std::isnan(a) && std::abs(a) < phi_step) || (!std::isnan(b) && std::abs(b) < phi_step))
                throw CountUnreliableError("count_cascades: landing ambiguity next to a sign change");
            continue;
        }
        if ((a < 0) == (b < 0)) continue;
        if (std::abs(a) + std::abs(b) >= kPi / 2) continue;  // branch-cut wrap, not a zero
        // bisect the shooting parameter onto the intersection
        double plo = phi_step * j, phi_hi = phi_step * (j + 1), clo = a;
        for (int it = 0; it < 60 && phi_hi - plo > 1e-12; ++it) {
            const double pm = 0.5 * (plo + phi_hi);
            const double cm = land_coord(pm);
            if (std::isnan(cm))
                throw CountUnreliableError("count_cascades: refinement left the target component");
            if ((clo < 0) != (cm < 0)) phi_hi = pm;
            else { plo = pm; clo = cm; }
        }
        ++count;
        out.trajectories.push_back(0.5 * (plo + phi_hi));
    }
    out.parity = count % 2;
    out.note = "single-cascade shooting count";
    return out;
}

void GradedComplex::validate() const {
    const std::size_t n = generators.size();
    if (boundary.size() != n) throw DataError("GradedComplex: boundary row count mismatch");
    for (const auto& row : boundary)
        if (row.size() != n) throw DataError("GradedComplex: boundary column count mismatch");
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = 0; t < n; ++t) {
            if (!boundary[s][t]) continue;
            if (generators[s].grading - generators[t].grading != HalfInt::whole(1))
                throw DataError("GradedComplex: boundary entry " + generators[s].id + " -> " +
                                generators[t].id + " does not drop the grading by 1");
            if (!(generators[s].action > generators[t].action))
                throw DataError("GradedComplex: boundary entry " + generators[s].id + " -> " +
                                generators[t].id + " does not strictly drop the action");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            int acc = 0;
            for (std::size_t j = 0; j < n; ++j) acc ^= boundary[i][j] & boundary[j][k];
            if (acc)
                throw DataError("GradedComplex: boundary squared is nonzero starting at generator " +
                                generators[i].id);
        }
    }
}

GradedComplex assemble_complex(const FlowModel& model, const CascadeParams& params,
                               double action_min, double action_max) {
    GradedComplex cx;
    for (const CriticalComponent& c : model.components())
        for (const MorsePoint& mp : c.morse_points) {
            if (c.f_value < action_min || c.f_value > action_max) continue;
            cx.generators.push_back({mp.id, HalfInt::whole(ind_fh(c, mp)), c.f_value});
        }
    const std::size_t n = cx.generators.size();
    cx.boundary.assign(n, std::vector<unsigned char>(n, 0));
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = 0; t < n; ++t) {
            if (cx.generators[s].grading - cx.generators[t].grading != HalfInt::whole(1)) continue;
            const CascadeCount c = count_cascades(model, cx.generators[t].id, cx.generators[s].id, params);
            cx.boundary[s][t] = static_cast<unsigned char>(c.parity);
        }
    }
    cx.validate();
    return cx;
}

namespace {

int z2_rank(std::vector<std::vector<unsigned char>> m) {
    int rank = 0;
    const std::size_t rows = m.size();
    if (rows == 0) return 0;
    const std::size_t cols = m[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t pivot = r;
        while (pivot < rows && !m[pivot][c]) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[pivot], m[r]);
        for (std::size_t i = 0; i < rows; ++i)
            if (i != r && m[i][c])
                for (std::size_t j = c; j < cols; ++j) m[i][j] ^= m[r][j];
        ++r;
        ++rank;
    }
    return rank;
}

}  // namespace

std::map<HalfInt, int> homology(const GradedComplex& complex) {
    complex.validate();
    std::map<HalfInt, std::vector<std::size_t>> by_grade;
    for (std::size_t i = 0; i < complex.generators.size(); ++i)
        by_grade[complex.generators[i].grading].push_back(i);

    // rank of the boundary block leaving each grade
    std::map<HalfInt, int> out_rank;
    for (const auto& [mu, src] : by_grade) {
        const HalfInt below = mu - HalfInt::whole(1);
        const auto it = by_grade.find(below);
        if (it == by_grade.end()) { out_rank[mu] = 0; continue; }
        std::vector<std::vector<unsigned char>> block(src.size(),
                                                      std::vector<unsigned char>(it->second.size(), 0));
        for (std::size_t a = 0; a < src.size(); ++a)
            for (std::size_t b = 0; b < it->second.size(); ++b)
                block[a][b] = complex.boundary[src[a]][it->second[b]];
        out_rank[mu] = z2_rank(std::move(block));
    }

    std::map<HalfInt, int> ranks;
    for (const auto& [mu, gens] : by_grade) {
        const HalfInt above = mu + HalfInt::whole(1);
        const int incoming = out_rank.count(above) ? out_rank[above] : 0;
        ranks[mu] = static_cast<int>(gens.size()) - out_rank[mu] - incoming;
    }
    return ranks;
}

GradedComplex involuted(const GradedComplex& complex) {
    GradedComplex out;
    out.generators = complex.generators;
    for (ComplexGenerator& g : out.generators) {
        g.grading = -g.grading;
        g.action = -g.action;
    }
    const std::size_t n = complex.generators.size();
    out.boundary.assign(n, std::vector<unsigned char>(n, 0));
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t) out.boundary[t][s] = complex.boundary[s][t];
    return out;
}

}  // namespace symflow::cascades
