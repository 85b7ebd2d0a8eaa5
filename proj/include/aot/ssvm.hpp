#pragma once

#include <functional>
#include <span>
#include <vector>

#include "aot/error.hpp"

namespace aot {

// Sorted (index, value) pairs. Margin constraints are mostly zero outside the
// slot blocks their assignments touch, so difference features stay sparse.
class SparseVec {
public:
    SparseVec() = default;
    static SparseVec from_dense(std::span<const double> v);

    void add(int index, double value);  // indices must arrive in ascending order
    double dot_dense(std::span<const double> v) const;
    double dot_sparse(const SparseVec& o) const;
    void axpy_into(double a, std::span<double> out) const;  // out += a * this
    double norm2() const;
    std::size_t nnz() const { return idx_.size(); }
    const std::vector<int>& indices() const { return idx_; }
    const std::vector<double>& values() const { return val_; }

private:
    std::vector<int> idx_;
    std::vector<double> val_;
};

// One margin constraint: w . dphi >= loss - xi_sample, where
// dphi = phi(X_k, y_k, H_k^d) - phi(X_k, y, H).
struct Constraint {
    int sample = 0;
    double loss = 0.0;
    SparseVec dphi;
};

struct SolverConfig {
    double d = 0.005;        // penalty D
    double tol = 1e-4;       // cutting-plane violation tolerance
    int max_iters = 200;     // cutting-plane iterations
    int smo_max_sweeps = 20000;
    double smo_tol_factor = 0.1;  // inner KKT tolerance = tol * factor
    int prune_after = 10;         // drop constraints at alpha = 0 this many solves in a row
};

struct TraceRow {
    int iter = 0;
    double primal = 0.0;       // true primal at this iterate (slacks from the oracle)
    double primal_best = 0.0;  // best primal over iterates so far; non-increasing
    double dual = 0.0;
    int violations = 0;
    double max_violation = 0.0;
    int n_constraints = 0;
};

// Dual state over the working set. Every sample implicitly owns a reference
// constraint (dphi = 0, loss = 0) that absorbs the remainder of its dual
// budget D, so per-sample sums stay exactly D and pairwise SMO updates keep
// all box constraints feasible.
class WorkingSet {
public:
    WorkingSet(int n_samples, int dim, double d);

    void add(Constraint c);
    // w . dphi_c gradient; the dual ascent direction for alpha_c.
    double gradient(int c) const { return constraints_[c].loss - constraints_[c].dphi.dot_dense(omega_); }
    // One deterministic pass of max-violating-pair updates per sample.
    // Returns the largest per-sample KKT gap seen before updating.
    double smo_sweep(double min_gap);
    void solve_dual(double kkt_tol, int max_sweeps);

    double dual_objective() const;
    double kkt_residual() const;
    // Slack of sample k implied by the working set.
    double slack(int k) const;
    void prune(int streak_limit);
    void rebuild_omega();

    std::span<const double> omega() const { return omega_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<double>& alpha() const { return alpha_; }
    int n_samples() const { return n_samples_; }
    double d() const { return d_; }

private:
    double pair_eta(int i, int j) const;

    int n_samples_ = 0;
    double d_ = 0.0;
    std::vector<Constraint> constraints_;  // first n_samples entries are the references
    std::vector<double> alpha_;
    std::vector<int> zero_streak_;
    std::vector<std::vector<int>> by_sample_;
    std::vector<double> omega_;
};

struct SolveReport {
    std::vector<double> omega;
    std::vector<TraceRow> trace;
    int iterations = 0;
    bool converged = false;
    double max_violation = 0.0;
    double kkt_residual = 0.0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
};

struct SolveFailure : ConvergenceError {
    explicit SolveFailure(SolveReport r)
        : ConvergenceError("ssvm solve did not converge within max_iters"), report(std::move(r)) {}
    SolveReport report;
};

// Most-violated-constraint oracle: for sample k and weights w, return the
// (y, H) maximizing w . phi + loss, expressed as a margin constraint.
using ConstraintOracle = std::function<Constraint(int sample, std::span<const double> omega)>;

// Cutting-plane outer loop with SMO dual solves. `parallel_oracle` evaluates
// the per-sample oracles concurrently (results are collected in sample order
// either way). Pass a WorkingSet to warm-start; it is updated in place.
SolveReport solve(int n_samples, int dim, const ConstraintOracle& oracle, const SolverConfig& cfg,
                  WorkingSet* warm = nullptr, int threads = 1);

void write_solver_trace_csv(const std::vector<TraceRow>& rows, const std::string& path);

}  // namespace aot
