#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symflow/halfint.hpp"
#include "symflow/paths.hpp"

namespace symflow::cascades {

// ind^sigma = ind^m - dim/2, the grading convention compatible with the
// symplectic-path indices.
HalfInt signature_index(int ind_m, int dim);

enum class DimFlavor { morse, signature, floer };

// Index data carried by a cascade endpoint; which fields are required
// depends on the flavor.
struct EndpointIndex {
    std::optional<int> ind_m_f;    // Morse-Bott index of the component
    int ind_m_h = 0;               // Morse index of the auxiliary function
    int component_dim = 0;
    std::optional<HalfInt> cz;     // Floer flavor
    std::optional<int> ambient_dim;  // signature flavor
};

struct ChainComponent {
    int ind_m_f = 0;
    int dim = 0;
};

// Expected dimension of the cascade moduli space between two generators.
// With a nonempty intermediate-component chain the per-cascade sum is formed
// and must telescope to the endpoint formula. x_minus = lower end, x_plus =
// upper end of the chain (the boundary operator counts rigid chains, i.e.
// dimension zero).
std::int64_t cascade_dimension(const EndpointIndex& x_minus, const EndpointIndex& x_plus,
                               const std::vector<ChainComponent>& components_chain,
                               DimFlavor flavor);

struct MorsePoint {
    std::string id;
    int ind_h = 0;
};

struct CriticalComponent {
    std::string id;
    int dim = 0;
    int ind_f = 0;
    double f_value = 0;
    std::vector<MorsePoint> morse_points;
};

// Closed-form flow model: ambient gradient dynamics plus per-component
// auxiliary Morse data. Shipped model: the round 2-sphere with f = z^2
// (two isolated maxima, a minimum circle) and h = x on the circle.
class FlowModel {
public:
    virtual ~FlowModel() = default;
    virtual std::string name() const = 0;
    virtual int ambient_dim() const = 0;
    virtual const std::vector<CriticalComponent>& components() const = 0;

    virtual double f(const Vec& p) const = 0;
    virtual Vec grad_f(const Vec& p) const = 0;      // tangent to the manifold
    virtual Vec project(const Vec& p) const = 0;     // back onto the manifold

    // component geometry
    virtual int component_of_generator(const std::string& gen_id) const = 0;
    virtual Vec generator_point(const std::string& gen_id) const = 0;
    virtual bool near_component(int comp, const Vec& p, double tube) const = 0;
    virtual Vec project_to_component(int comp, const Vec& p) const = 0;
    // ascending h-flow on a component, one step of size dt
    virtual Vec h_flow_step(int comp, const Vec& p, double dt) const = 0;
    virtual double h_grad_norm(int comp, const Vec& p) const = 0;
    // signed transverse coordinate of p relative to a Morse point's
    // ascending-unstable set on the component (used for intersection counts)
    virtual double transverse_coordinate(const std::string& gen_id, const Vec& p) const = 0;
    // continuously parameterized descending shooting sphere around a
    // generator on an isolated component, phi in [0, 2 pi)
    virtual Vec shooting_point(const std::string& gen_id, double phi, double radius) const = 0;
    // descending h-flow shooting seeds inside a component (zero-cascade counts)
    virtual std::vector<Vec> h_unstable_seeds(const std::string& gen_id, double offset) const = 0;
    // sample points covering a component (for validation)
    virtual std::vector<Vec> component_samples(int comp, int count) const = 0;

    // sampled check that the gradient vanishes on the declared critical set
    void validate(double tol = 1e-9) const;
};

std::unique_ptr<FlowModel> make_s2_zsq_model();

struct CascadeParams {
    double tube = 1e-3;        // tubular-neighborhood radius for event detection
    double step = 1e-3;        // RK4 step for shooting
    int shots = 720;           // shooting-sphere resolution
    double sphere_radius = 1e-2;
    long max_steps = 2000000;
    double converge_tol = 1e-7;
};

struct CascadeCount {
    int parity = 0;                    // Z2 count of rigid cascade chains
    std::vector<double> trajectories;  // shooting parameters of accepted chains
    std::string note;
};

// Z2 count of rigid cascades from x_minus up to x_plus. Throws
// PreconditionError unless the expected dimension is zero,
// CountUnreliableError on shooting non-convergence or boundary-proximity
// ambiguity (never a silent zero).
CascadeCount count_cascades(const FlowModel& model, const std::string& x_minus,
                            const std::string& x_plus, const CascadeParams& params = {});

struct ComplexGenerator {
    std::string id;
    HalfInt grading;
    double action = 0;
};

// Z2 chain complex; boundary[source][target] over generator indices.
// Nonzero entries only drop the grading by exactly one and strictly drop
// the action from source to target.
struct GradedComplex {
    std::vector<ComplexGenerator> generators;
    std::vector<std::vector<unsigned char>> boundary;

    void validate() const;  // grading/action rules + boundary^2 = 0
};

// Assemble the model's complex by counting rigid cascades between all
// generator pairs one degree apart, restricted to the action window.
GradedComplex assemble_complex(const FlowModel& model, const CascadeParams& params = {},
                               double action_min = -1e300, double action_max = 1e300);

// Ranks of ker/im per grading, Z2 Gaussian elimination.
std::map<HalfInt, int> homology(const GradedComplex& complex);

// Grading/action negation with transposed boundary (loop-reversal symmetry
// at the complex level).
GradedComplex involuted(const GradedComplex& complex);

}  // namespace symflow::cascades
