#include "symflow/paths.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace symflow {

using nlohmann::json;

Mat standard_j(int dim) {
    if (dim <= 0 || dim % 2 != 0)
        throw ValidationError("standard_j: dimension must be even positive, got " + std::to_string(dim));
    const int k = dim / 2;
    Mat j = Mat::Zero(dim, dim);
    j.topRightCorner(k, k) = -Mat::Identity(k, k);
    j.bottomLeftCorner(k, k) = Mat::Identity(k, k);
    return j;
}

bool validate_symplectic(const Mat& m, double tol) {
    if (m.rows() != m.cols()) throw ValidationError("validate_symplectic: matrix not square");
    if (m.rows() % 2 != 0) throw ValidationError("validate_symplectic: odd dimension " + std::to_string(m.rows()));
    const Mat j = standard_j(static_cast<int>(m.rows()));
    return (m.transpose() * j * m - j).cwiseAbs().maxCoeff() <= tol;
}

void SymmetricPath::validate(double symmetry_tol) const {
    if (dim <= 0) throw ValidationError("SymmetricPath: nonpositive dimension");
    if (dim > 64) throw ValidationError("SymmetricPath: dimension above supported limit 64");
    if (params.size() < 2 || params.size() != samples.size())
        throw ValidationError("SymmetricPath: need >= 2 samples aligned with parameters");
    for (std::size_t i = 0; i + 1 < params.size(); ++i)
        if (!(params[i] < params[i + 1]))
            throw ValidationError("SymmetricPath: parameters not strictly increasing");
    auto check_sym = [&](const Mat& a, const char* what) {
        if (a.rows() != dim || a.cols() != dim)
            throw ValidationError(std::string("SymmetricPath: ") + what + " has wrong shape");
        if ((a - a.transpose()).cwiseAbs().maxCoeff() > symmetry_tol)
            throw ValidationError(std::string("SymmetricPath: ") + what + " not symmetric within tolerance");
    };
    for (const Mat& a : samples) check_sym(a, "sample");
    check_sym(left_asymptote, "left asymptote");
    check_sym(right_asymptote, "right asymptote");
}

Mat SymmetricPath::at(double s) const {
    if (s <= params.front()) return s < params.front() ? left_asymptote : samples.front();
    if (s >= params.back()) return s > params.back() ? right_asymptote : samples.back();
    const auto it = std::upper_bound(params.begin(), params.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - params.begin()) - 1;
    const double t = (s - params[i]) / (params[i + 1] - params[i]);
    return (1.0 - t) * samples[i] + t * samples[i + 1];
}

Mat SymmetricPath::derivative(double s) const {
    double h = (hi() - lo()) / static_cast<double>(params.size() - 1);
    const auto it = std::upper_bound(params.begin(), params.end(), s);
    if (it != params.begin() && it != params.end()) {
        const std::size_t i = static_cast<std::size_t>(it - params.begin()) - 1;
        h = std::min(h, params[i + 1] - params[i]);
    }
    h *= 0.5;
    const double a = std::max(lo(), s - h), b = std::min(hi(), s + h);
    if (b <= a) return Mat::Zero(dim, dim);
    return (at(b) - at(a)) / (b - a);
}

SymmetricPath sample_path(const std::function<Mat(double)>& generator,
                          double lo, double hi, int count) {
    if (count < 2) throw ValidationError("sample_path: need count >= 2");
    if (!(lo < hi)) throw ValidationError("sample_path: empty interval");
    SymmetricPath p;
    for (int i = 0; i < count; ++i) {
        const double s = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
        Mat a = generator(s);
        if (i == 0) p.dim = static_cast<int>(a.rows());
        p.params.push_back(s);
        p.samples.push_back(std::move(a));
    }
    p.left_asymptote = p.samples.front();
    p.right_asymptote = p.samples.back();
    p.validate();
    return p;
}

namespace {

Mat rk4_step(const SymmetricPath& s, const Mat& j, const Mat& psi, double t, double h) {
    const Mat k1 = j * s.at(t) * psi;
    const Mat k2 = j * s.at(t + 0.5 * h) * (psi + 0.5 * h * k1);
    const Mat k3 = j * s.at(t + 0.5 * h) * (psi + 0.5 * h * k2);
    const Mat k4 = j * s.at(t + h) * (psi + h * k3);
    return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double defect(const Mat& psi, const Mat& j) {
    return (psi.transpose() * j * psi - j).cwiseAbs().maxCoeff();
}

}  // namespace

SymplecticPath linearized_flow(const SymmetricPath& s, int steps, const LinearizedFlowOptions& opt) {
    s.validate();
    if (steps < 1) throw ValidationError("linearized_flow: steps must be >= 1");
    if (s.dim % 2 != 0) throw ValidationError("linearized_flow: generator dimension must be even");
    if (std::abs(s.lo()) > 1e-12 || std::abs(s.hi() - 1.0) > 1e-12)
        throw ValidationError("linearized_flow: generator must be defined on [0,1]");

    const Mat j = standard_j(s.dim);
    for (int doubling = 0; doubling <= opt.max_doublings; ++doubling) {
        const int n = steps << doubling;
        const double h = 1.0 / n;
        std::vector<Mat> fine;
        fine.reserve(n + 1);
        fine.push_back(Mat::Identity(s.dim, s.dim));
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            Mat next = rk4_step(s, j, fine.back(), i * h, h);
            if (defect(next, j) > opt.defect_tol) { ok = false; break; }
            fine.push_back(std::move(next));
        }
        if (!ok) continue;
        SymplecticPath out;
        out.dim = s.dim;
        out.generator = s;
        const int stride = 1 << doubling;
        for (int i = 0; i <= steps; ++i) {
            out.times.push_back(static_cast<double>(i) / steps);
            out.frames.push_back(fine[static_cast<std::size_t>(i) * stride]);
        }
        out.fine_times.resize(n + 1);
        for (int i = 0; i <= n; ++i) out.fine_times[i] = i * h;
        out.fine_frames = std::move(fine);
        return out;
    }
    throw IntegrationError("linearized_flow: symplectic defect above tolerance after refinement limit");
}

Mat SymplecticPath::at(double t) const {
    if (t <= 0.0) return fine_frames.front();
    if (t >= fine_times.back()) return fine_frames.back();
    const double h = fine_times[1] - fine_times[0];
    auto i = static_cast<std::size_t>(t / h);
    if (i >= fine_frames.size() - 1) i = fine_frames.size() - 2;
    const double dt = t - fine_times[i];
    if (dt <= 0.0) return fine_frames[i];
    const Mat j = standard_j(dim);
    return rk4_step(generator, j, fine_frames[i], fine_times[i], dt);
}

void validate_regular_pair(const RegularPair& p, double tol) {
    const auto w = p.a.rows();
    if (p.a.cols() != w || (p.a - p.a.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw RegularityError("regular pair: A must be square symmetric");
    if (p.b.rows() != w || p.b.cols() > w)
        throw RegularityError("regular pair: B must be dim_W x dim_V with dim_V <= dim_W");
    if (p.b.cols() == 0) return;  // empty V: trivially regular

    Eigen::JacobiSVD<Mat> svd(p.b, Eigen::ComputeThinU);
    if (svd.rank() < p.b.cols() || svd.singularValues().minCoeff() <= tol)
        throw RegularityError("regular pair: B is not injective (column rank deficient)");
    const Mat q = svd.matrixU();  // orthonormal basis of range(B)

    // invariance: A range(B) subset range(B)
    const Mat aq = p.a * q;
    const Mat off = aq - q * (q.transpose() * aq);
    if (off.cwiseAbs().maxCoeff() > tol * std::max(1.0, p.a.cwiseAbs().maxCoeff()))
        throw RegularityError("regular pair: A does not map range(B) into range(B)");

    const Mat a_hat = q.transpose() * p.a * q;
    Eigen::SelfAdjointEigenSolver<Mat> es(a_hat);
    if (es.eigenvalues().cwiseAbs().minCoeff() <= tol)
        throw RegularityError("regular pair: A restricted to range(B) is singular");
}

namespace {

json matrix_to_json(const Mat& a) {
    json row = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(i, c));
    return row;
}

Mat matrix_from_json(const json& row, int dim, const char* what) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(dim) * dim)
        throw IoError(std::string("path file: ") + what + " has wrong length");
    Mat a(dim, dim);
    std::size_t k = 0;
    for (int i = 0; i < dim; ++i)
        for (int c = 0; c < dim; ++c) a(i, c) = row[k++].get<double>();
    return a;
}

}  // namespace

SymmetricPath path_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("path file: invalid JSON: ") + e.what());
    }
    if (!doc.contains("dim") || !doc.contains("samples"))
        throw IoError("path file: missing 'dim' or 'samples'");
    SymmetricPath p;
    p.dim = doc["dim"].get<int>();
    for (const auto& entry : doc["samples"]) {
        if (!entry.is_array() || entry.size() != 2) throw IoError("path file: sample entries must be [s, matrix]");
        p.params.push_back(entry[0].get<double>());
        p.samples.push_back(matrix_from_json(entry[1], p.dim, "sample"));
    }
    if (p.samples.empty()) throw IoError("path file: no samples");
    p.left_asymptote = doc.contains("left_asymptote")
                           ? matrix_from_json(doc["left_asymptote"], p.dim, "left_asymptote")
                           : p.samples.front();
    p.right_asymptote = doc.contains("right_asymptote")
                            ? matrix_from_json(doc["right_asymptote"], p.dim, "right_asymptote")
                            : p.samples.back();
    p.validate();
    return p;
}

std::string path_to_json_text(const SymmetricPath& p) {
    json doc;
    doc["dim"] = p.dim;
    doc["interval"] = json::array({p.lo(), p.hi()});
    json samples = json::array();
    for (std::size_t i = 0; i < p.samples.size(); ++i)
        samples.push_back(json::array({p.params[i], matrix_to_json(p.samples[i])}));
    doc["samples"] = std::move(samples);
    doc["left_asymptote"] = matrix_to_json(p.left_asymptote);
    doc["right_asymptote"] = matrix_to_json(p.right_asymptote);
    return doc.dump(2) + "\n";
}

SymmetricPath load_path(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open path file: " + file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return path_from_json_text(text);
}

void save_path(const SymmetricPath& p, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write path file: " + file);
    out << path_to_json_text(p);
    if (!out) throw IoError("write failed: " + file);
}

}  // namespace symflow
