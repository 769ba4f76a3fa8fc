#include "sri/markov.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace sri {

bool is_distribution(const Vec& w, double tol) {
    if (w.size() == 0 || !w.allFinite()) return false;
    if (w.minCoeff() < -tol) return false;
    return std::abs(w.sum() - 1.0) <= tol;
}

namespace {
void require_row_stochastic(const Mat& P) {
    if (P.rows() != P.cols()) throw std::invalid_argument("kernel matrix must be square");
    for (int s = 0; s < P.rows(); ++s) {
        if (!is_distribution(P.row(s).transpose(), 1e-9))
            throw std::invalid_argument("kernel row " + std::to_string(s) + " is not a distribution");
    }
}
}  // namespace

MarkovKernel MarkovKernel::iterate_independent(Mat P) {
    require_row_stochastic(P);
    MarkovKernel k;
    k.variant_ = Variant::IterateIndependent;
    k.n_states_ = static_cast<int>(P.rows());
    k.matrix_ = std::move(P);
    return k;
}

MarkovKernel MarkovKernel::iterate_dependent(int n_states, std::function<Vec(const Vec&, int)> row) {
    if (n_states < 1) throw std::invalid_argument("n_states must be >= 1");
    MarkovKernel k;
    k.variant_ = Variant::IterateDependent;
    k.n_states_ = n_states;
    k.row_fn_ = std::move(row);
    return k;
}

MarkovKernel MarkovKernel::controlled(std::vector<Mat> per_control, Mat policy) {
    if (per_control.empty()) throw std::invalid_argument("controlled kernel needs >= 1 control matrix");
    const int n = static_cast<int>(per_control.front().rows());
    for (const auto& P : per_control) {
        require_row_stochastic(P);
        if (P.rows() != n) throw std::invalid_argument("control matrices disagree on state count");
    }
    if (policy.rows() != n || policy.cols() != static_cast<long>(per_control.size()))
        throw std::invalid_argument("policy matrix must be n_states x n_controls");
    for (int s = 0; s < n; ++s)
        if (!is_distribution(policy.row(s).transpose(), 1e-9))
            throw std::invalid_argument("policy row " + std::to_string(s) + " is not a distribution");
    MarkovKernel k;
    k.variant_ = Variant::Controlled;
    k.n_states_ = n;
    k.per_control_ = std::move(per_control);
    k.policy_ = std::move(policy);
    return k;
}

Vec MarkovKernel::effective_row(const Vec& x, int s) const {
    if (s < 0 || s >= n_states_) throw std::out_of_range("state index out of range");
    Vec row;
    switch (variant_) {
        case Variant::IterateIndependent:
            row = matrix_.row(s).transpose();
            break;
        case Variant::IterateDependent:
            row = row_fn_(x, s);
            break;
        case Variant::Controlled: {
            row = Vec::Zero(n_states_);
            for (size_t z = 0; z < per_control_.size(); ++z)
                row += policy_(s, static_cast<long>(z)) * per_control_[z].row(s).transpose();
            break;
        }
    }
    if (!is_distribution(row, 1e-9))
        throw std::runtime_error("effective kernel row is not a distribution at state " +
                                 std::to_string(s));
    return row;
}

Mat MarkovKernel::effective_matrix(const Vec& x) const {
    Mat P(n_states_, n_states_);
    for (int s = 0; s < n_states_; ++s) P.row(s) = effective_row(x, s).transpose();
    return P;
}

int MarkovKernel::sample_next(const Vec& x, int s, Rng& rng) const {
    Vec row = effective_row(x, s);
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (int j = 0; j < n_states_; ++j) {
        acc += row(j);
        if (u < acc) return j;
    }
    return n_states_ - 1;
}

std::vector<std::vector<int>> recurrent_classes(const Mat& P, double support_tol) {
    const int n = static_cast<int>(P.rows());
    // Boolean reachability closure; n is small here.
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) {
        reach[i][i] = true;
        for (int j = 0; j < n; ++j)
            if (P(i, j) > support_tol) reach[i][j] = true;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (reach[i][k])
                for (int j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = true;

    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> classes;
    for (int i = 0; i < n; ++i) {
        if (comp[i] != -1) continue;
        std::vector<int> members;
        for (int j = 0; j < n; ++j)
            if (reach[i][j] && reach[j][i]) members.push_back(j);
        bool closed = true;
        for (int j : members)
            for (int t = 0; t < n; ++t)
                if (P(j, t) > support_tol && !(reach[t][i] && reach[i][t])) closed = false;
        int id = closed ? static_cast<int>(classes.size()) : -2;
        for (int j : members) comp[j] = id;
        if (closed) classes.push_back(std::move(members));
    }
    return classes;
}

namespace {
Vec solve_stationary_block(const Mat& Pc, double tol) {
    const int n = static_cast<int>(Pc.rows());
    Mat A = Pc.transpose() - Mat::Identity(n, n);
    A.row(n - 1).setOnes();
    Vec rhs = Vec::Zero(n);
    rhs(n - 1) = 1.0;
    Vec pi = A.fullPivLu().solve(rhs);

    auto residual = [&](const Vec& p) { return (p.transpose() * Pc - p.transpose()).cwiseAbs().sum(); };

    if (!pi.allFinite() || pi.minCoeff() < -tol || residual(pi) > tol) {
        // Damped power iteration handles periodic and near-singular blocks.
        pi = Vec::Constant(n, 1.0 / n);
        Mat Pd = 0.5 * (Pc + Mat::Identity(n, n));
        for (int it = 0; it < 200000; ++it) {
            pi = (pi.transpose() * Pd).transpose();
            pi /= pi.sum();
            if (it % 64 == 0 && residual(pi) <= tol * 0.1) break;
        }
    }
    pi = pi.cwiseMax(0.0);
    pi /= pi.sum();
    if (residual(pi) > tol)
        throw std::runtime_error("stationary solve: residual above tolerance");
    return pi;
}
}  // namespace

StationarySet stationary_vertices(const Mat& P, double tol) {
    require_row_stochastic(P);
    StationarySet out;
    out.classes = recurrent_classes(P);
    const int n = static_cast<int>(P.rows());
    for (const auto& cls : out.classes) {
        const int m = static_cast<int>(cls.size());
        Mat Pc(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) Pc(i, j) = P(cls[i], cls[j]);
        // A closed class loses no mass; renormalize round-off only.
        for (int i = 0; i < m; ++i) Pc.row(i) /= Pc.row(i).sum();
        Vec pi_c = solve_stationary_block(Pc, tol);
        Vec pi = Vec::Zero(n);
        for (int i = 0; i < m; ++i) pi(cls[i]) = pi_c(i);
        double res = (pi.transpose() * P - pi.transpose()).cwiseAbs().sum();
        if (res > tol) throw std::runtime_error("stationary solve: full-matrix residual above tolerance");
        out.vertices.push_back(std::move(pi));
    }
    return out;
}

StationarySet stationary_set(const MarkovKernel& kernel, const Vec& x, double tol) {
    return stationary_vertices(kernel.effective_matrix(x), tol);
}

Mat load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty matrix file: " + path);
    Mat M(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size())
            throw std::runtime_error("ragged matrix file: " + path);
        for (size_t j = 0; j < rows[i].size(); ++j)
            M(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
    }
    return M;
}

}  // namespace sri
