#include "aot/ssvm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aot/log.hpp"

namespace aot {

SparseVec SparseVec::from_dense(std::span<const double> v) {
    SparseVec out;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) out.add(static_cast<int>(i), v[i]);
    return out;
}

void SparseVec::add(int index, double value) {
    if (!idx_.empty() && index <= idx_.back())
        throw std::invalid_argument("sparse indices must be strictly ascending");
    idx_.push_back(index);
    val_.push_back(value);
}

double SparseVec::dot_dense(std::span<const double> v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < idx_.size(); ++i) s += val_[i] * v[idx_[i]];
    return s;
}

double SparseVec::dot_sparse(const SparseVec& o) const {
    double s = 0.0;
    std::size_t i = 0, j = 0;
    while (i < idx_.size() && j < o.idx_.size()) {
        if (idx_[i] < o.idx_[j]) ++i;
        else if (idx_[i] > o.idx_[j]) ++j;
        else s += val_[i++] * o.val_[j++];
    }
    return s;
}

void SparseVec::axpy_into(double a, std::span<double> out) const {
    for (std::size_t i = 0; i < idx_.size(); ++i) out[idx_[i]] += a * val_[i];
}

double SparseVec::norm2() const {
    double s = 0.0;
    for (double v : val_) s += v * v;
    return s;
}

WorkingSet::WorkingSet(int n_samples, int dim, double d)
    : n_samples_(n_samples), d_(d), omega_(dim, 0.0) {
    by_sample_.resize(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        Constraint ref;
        ref.sample = k;
        constraints_.push_back(std::move(ref));
        alpha_.push_back(d);
        zero_streak_.push_back(0);
        by_sample_[k].push_back(k);
    }
}

void WorkingSet::add(Constraint c) {
    by_sample_[c.sample].push_back(static_cast<int>(constraints_.size()));
    constraints_.push_back(std::move(c));
    alpha_.push_back(0.0);
    zero_streak_.push_back(0);
}

double WorkingSet::pair_eta(int i, int j) const {
    return constraints_[i].dphi.norm2() + constraints_[j].dphi.norm2() -
           2.0 * constraints_[i].dphi.dot_sparse(constraints_[j].dphi);
}

double WorkingSet::smo_sweep(double min_gap) {
    double worst_gap = 0.0;
    for (int k = 0; k < n_samples_; ++k) {
        const auto& members = by_sample_[k];
        if (members.size() < 2) continue;
        int up = -1, down = -1;
        double g_up = -std::numeric_limits<double>::infinity();
        double g_down = std::numeric_limits<double>::infinity();
        for (int c : members) {
            const double g = gradient(c);
            if (g > g_up) {
                g_up = g;
                up = c;
            }
            if (alpha_[c] > 0.0 && g < g_down) {
                g_down = g;
                down = c;
            }
        }
        const double gap = g_up - g_down;
        worst_gap = std::max(worst_gap, gap);
        if (up < 0 || down < 0 || up == down || gap <= min_gap) continue;

        const double eta = pair_eta(up, down);
        double step = alpha_[down];
        if (eta > 1e-300) step = std::min(step, gap / eta);
        if (step <= 0.0) continue;
        alpha_[up] += step;
        alpha_[down] -= step;
        constraints_[up].dphi.axpy_into(step, omega_);
        constraints_[down].dphi.axpy_into(-step, omega_);
    }
    return worst_gap;
}

void WorkingSet::solve_dual(double kkt_tol, int max_sweeps) {
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (smo_sweep(kkt_tol) <= kkt_tol) return;
    }
    AOT_LOG_WARN("smo hit sweep cap (%d) before reaching kkt tolerance", max_sweeps);
}

double WorkingSet::dual_objective() const {
    double lin = 0.0;
    for (std::size_t c = 0; c < constraints_.size(); ++c) lin += alpha_[c] * constraints_[c].loss;
    double quad = 0.0;
    for (double w : omega_) quad += w * w;
    return lin - 0.5 * quad;
}

double WorkingSet::kkt_residual() const {
    double worst = 0.0;
    for (int k = 0; k < n_samples_; ++k) {
        double g_max = -std::numeric_limits<double>::infinity();
        double g_active_min = std::numeric_limits<double>::infinity();
        for (int c : by_sample_[k]) {
            const double g = gradient(c);
            g_max = std::max(g_max, g);
            if (alpha_[c] > 0.0) g_active_min = std::min(g_active_min, g);
        }
        if (g_active_min != std::numeric_limits<double>::infinity())
            worst = std::max(worst, g_max - g_active_min);
    }
    return worst;
}

double WorkingSet::slack(int k) const {
    double s = 0.0;  // the reference constraint contributes gradient 0
    for (int c : by_sample_[k]) s = std::max(s, gradient(c));
    return s;
}

void WorkingSet::prune(int streak_limit) {
    for (std::size_t c = n_samples_; c < constraints_.size(); ++c)
        zero_streak_[c] = alpha_[c] == 0.0 ? zero_streak_[c] + 1 : 0;
    std::vector<Constraint> kept_c;
    std::vector<double> kept_a;
    std::vector<int> kept_z;
    for (std::size_t c = 0; c < constraints_.size(); ++c) {
        if (c >= static_cast<std::size_t>(n_samples_) && zero_streak_[c] >= streak_limit) continue;
        kept_c.push_back(std::move(constraints_[c]));
        kept_a.push_back(alpha_[c]);
        kept_z.push_back(zero_streak_[c]);
    }
    constraints_ = std::move(kept_c);
    alpha_ = std::move(kept_a);
    zero_streak_ = std::move(kept_z);
    for (auto& v : by_sample_) v.clear();
    for (std::size_t c = 0; c < constraints_.size(); ++c)
        by_sample_[constraints_[c].sample].push_back(static_cast<int>(c));
}

void WorkingSet::rebuild_omega() {
    std::fill(omega_.begin(), omega_.end(), 0.0);
    for (std::size_t c = 0; c < constraints_.size(); ++c)
        if (alpha_[c] != 0.0) constraints_[c].dphi.axpy_into(alpha_[c], omega_);
}

SolveReport solve(int n_samples, int dim, const ConstraintOracle& oracle, const SolverConfig& cfg,
                  WorkingSet* warm, int threads) {
    if (cfg.d <= 0.0) throw std::invalid_argument("penalty D must be positive");
    WorkingSet local(n_samples, dim, cfg.d);
    WorkingSet& ws = warm ? *warm : local;

    SolveReport report;
    double primal_best = std::numeric_limits<double>::infinity();
    const double inner_tol = cfg.tol * cfg.smo_tol_factor;

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        std::vector<Constraint> found(n_samples);
        if (threads == 1) {
            for (int k = 0; k < n_samples; ++k) found[k] = oracle(k, ws.omega());
        } else {
#ifdef _OPENMP
            const int n_threads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(n_threads)
            for (int k = 0; k < n_samples; ++k) found[k] = oracle(k, ws.omega());
#else
            for (int k = 0; k < n_samples; ++k) found[k] = oracle(k, ws.omega());
#endif
        }

        int added = 0;
        double max_violation = 0.0;
        double hinge_sum = 0.0;
        for (int k = 0; k < n_samples; ++k) {
            const double margin = found[k].loss - found[k].dphi.dot_dense(ws.omega());
            hinge_sum += std::max(0.0, margin);
            const double violation = margin - ws.slack(k);
            max_violation = std::max(max_violation, violation);
            if (violation > cfg.tol) {
                found[k].sample = k;
                ws.add(std::move(found[k]));
                ++added;
            }
        }

        double norm2 = 0.0;
        for (double w : ws.omega()) norm2 += w * w;
        const double primal = 0.5 * norm2 + cfg.d * hinge_sum;
        primal_best = std::min(primal_best, primal);
        report.trace.push_back({iter, primal, primal_best, ws.dual_objective(), added,
                                max_violation, static_cast<int>(ws.constraints().size())});
        report.iterations = iter;
        report.max_violation = max_violation;

        if (added == 0) {
            report.converged = true;
            break;
        }
        ws.solve_dual(inner_tol, cfg.smo_max_sweeps);
        ws.prune(cfg.prune_after);
    }

    ws.rebuild_omega();
    report.omega.assign(ws.omega().begin(), ws.omega().end());
    report.kkt_residual = ws.kkt_residual();
    report.dual_objective = ws.dual_objective();
    report.primal_objective = report.trace.empty() ? 0.0 : report.trace.back().primal;
    if (!report.converged) throw SolveFailure(std::move(report));
    return report;
}

void write_solver_trace_csv(const std::vector<TraceRow>& rows, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot write solver trace: " + path);
    std::fprintf(f, "iter,primal,primal_best,dual,violations,max_violation,constraints\n");
    for (const TraceRow& r : rows) {
        std::fprintf(f, "%d,%.17g,%.17g,%.17g,%d,%.17g,%d\n", r.iter, r.primal, r.primal_best,
                     r.dual, r.violations, r.max_violation, r.n_constraints);
    }
    std::fclose(f);
}

}  // namespace aot
