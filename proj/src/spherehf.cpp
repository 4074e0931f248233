#include "symflow/spherehf.hpp"

#include <array>
#include <cmath>

namespace symflow::spherehf {

namespace {

std::array<int, 4> h0_indices(int n) { return {0, n - 1, n, 2 * n - 1}; }

HalfInt generator_grading(int n, std::int64_t m, int h0_index) {
    // 2 m (n-1) + h0 - (2n-1)/2, kept exact in halves
    return HalfInt{4 * m * (n - 1) + 2 * h0_index - (2 * n - 1)};
}

}  // namespace

HalfInt geodesic_cz(int n, std::int64_t m) {
    if (n < 2) throw ValidationError("geodesic_cz: need n >= 2");
    if (m == 0) return HalfInt::whole(0);
    if (m < 0) return -geodesic_cz(n, -m);  // loop-reversal antisymmetry
    // (2m-1)(n-1) conjugate points plus half the nullity 2n-2
    return HalfInt::whole((2 * m - 1) * (n - 1) + (n - 1));
}

std::vector<SphereGenerator> grading_table(int n, std::int64_t m_lo, std::int64_t m_hi) {
    if (n < 2) throw ValidationError("grading_table: need n >= 2");
    if (m_lo > m_hi) throw ValidationError("grading_table: empty multiplicity range");
    std::vector<SphereGenerator> out;
    for (std::int64_t m = m_lo; m <= m_hi; ++m)
        for (int i : h0_indices(n))
            out.push_back({m, i, generator_grading(n, m, i), static_cast<double>(m)});
    return out;
}

std::vector<LacunaryPair> lacunary_scan(int n) {
    if (n < 2) throw ValidationError("lacunary_scan: need n >= 2");
    std::vector<LacunaryPair> out;
    const auto idx = h0_indices(n);
    // 2 dm (n-1) = 1 - (i2 - i1) with dm >= 1; the right side is bounded by
    // 1 + (2n-1), so dm <= n/(n-1) and the enumeration is complete for all m.
    for (std::int64_t dm = 1; 2 * dm * (n - 1) <= 2 * n; ++dm)
        for (int i1 : idx)
            for (int i2 : idx)
                if (2 * dm * (n - 1) + (i2 - i1) == 1) out.push_back({i1, i2, dm});
    return out;
}

HFResult hf_table(int n, double window_lo, double window_hi) {
    if (n < 2) throw ValidationError("hf_table: need n >= 2");
    if (!(window_lo <= window_hi)) throw ValidationError("hf_table: empty degree window");
    HFResult res;
    res.obstructions = lacunary_scan(n);
    if (!res.obstructions.empty()) return res;  // the argument does not determine the table

    HFTable table;
    table.n = n;
    table.window_lo = window_lo;
    table.window_hi = window_hi;
    // gradings move by 2(n-1) per multiplicity step; cover the window
    const double period = 2.0 * (n - 1);
    const auto m_min = static_cast<std::int64_t>(std::floor((window_lo - 2.0 * n) / period));
    const auto m_max = static_cast<std::int64_t>(std::ceil((window_hi + 2.0 * n) / period));
    for (std::int64_t m = m_min; m <= m_max; ++m) {
        for (int i : h0_indices(n)) {
            const HalfInt g = generator_grading(n, m, i);
            if (2.0 * window_lo <= g.twice && g.twice <= 2.0 * window_hi) table.ranks[g] += 1;
        }
    }
    res.table = std::move(table);
    return res;
}

}  // namespace symflow::spherehf
