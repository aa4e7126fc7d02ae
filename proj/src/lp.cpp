#include "rpop/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace rpop::lp {

int LinearProgram::add_var(double lo, double hi, double cost, std::string tag) {
  lower.push_back(lo);
  upper.push_back(hi);
  objective.push_back(cost);
  var_tags.push_back(std::move(tag));
  return num_vars++;
}

int LinearProgram::add_row(Row r) {
  rows.push_back(std::move(r));
  return static_cast<int>(rows.size()) - 1;
}

int LinearProgram::add_row(std::vector<Entry> coeffs, Sense sense, double rhs, std::string tag,
                           bool lazy) {
  Row r;
  r.coeffs = std::move(coeffs);
  r.sense = sense;
  r.rhs = rhs;
  r.tag = std::move(tag);
  r.lazy = lazy;
  return add_row(std::move(r));
}

void LinearProgram::validate() const {
  if (static_cast<int>(lower.size()) != num_vars || static_cast<int>(upper.size()) != num_vars ||
      static_cast<int>(objective.size()) != num_vars)
    throw SolveError("lp: variable array sizes disagree with num_vars");
  for (int j = 0; j < num_vars; ++j) {
    if (lower[j] > upper[j])
      throw SolveError("lp: variable " + std::to_string(j) + " has empty bound interval");
    if (!std::isfinite(objective[j]))
      throw SolveError("lp: variable " + std::to_string(j) + " has non-finite objective");
  }
  for (size_t r = 0; r < rows.size(); ++r) {
    if (!std::isfinite(rows[r].rhs))
      throw SolveError("lp: row " + std::to_string(r) + " has non-finite rhs");
    for (const Entry& e : rows[r].coeffs) {
      if (e.col < 0 || e.col >= num_vars)
        throw SolveError("lp: row " + std::to_string(r) + " references invalid column");
      if (!std::isfinite(e.val))
        throw SolveError("lp: row " + std::to_string(r) + " has non-finite coefficient");
    }
  }
}

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kTieTol = 1e-9;
constexpr double kDegenTol = 1e-10;

/// Bounded-variable primal simplex over an explicit active subset of the
/// rows.
///
/// Column space: structural variables, then one slack per ORIGINAL row (so
/// slack ids survive row activation), then artificial columns introduced by
/// the phase-1 repair. The basis inverse is dense, updated in product form on
/// pivots and bordered when rows activate.
///
/// Infeasible basic values never enter the pivot loop: they are swapped into
/// one-sided artificial variables whose columns equal the replaced basic
/// columns (the inverse is untouched), and a fixed unit objective drives the
/// artificials to zero. Bland's rule therefore terminates both phases.
class Simplex {
public:
  enum class Outcome { Optimal, Infeasible, Unbounded };

  Simplex(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
    n_ = lp.num_vars;
    nrows_ = static_cast<int>(lp.rows.size());
    slack_end_ = n_ + nrows_;
  }

  void set_active(const std::vector<int>& rows) {
    active_ = rows;
    m_ = static_cast<int>(active_.size());
    pos_in_active_.assign(nrows_, -1);
    for (int i = 0; i < m_; ++i) pos_in_active_[active_[i]] = i;

    lo_.assign(slack_end_, 0.0);
    hi_.assign(slack_end_, 0.0);
    cost_.assign(slack_end_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
      cost_[j] = lp_.objective[j];
    }
    for (int r = 0; r < nrows_; ++r) set_slack_bounds(r);
    rhs_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) rhs_[i] = lp_.rows[active_[i]].rhs;
    n_art_ = 0;
    art_start_ = {0};
    art_pos_.clear();
    art_val_.clear();
    dual_farkas_.clear();
    build_columns();
  }

  const std::vector<int>& active() const { return active_; }
  long iterations() const { return iterations_; }

  void install_slack() {
    perturbed_ = false;
    drop_artificials();
    vstat_.assign(total_cols(), VarStatus::AtLower);
    for (int j = 0; j < total_cols(); ++j) vstat_[j] = default_nonbasic_status(j);
    basic_var_.assign(m_, -1);
    pos_of_.assign(total_cols(), -1);
    for (int i = 0; i < m_; ++i) {
      int s = n_ + active_[i];
      basic_var_[i] = s;
      vstat_[s] = VarStatus::Basic;
      pos_of_[s] = i;
    }
    devex_.assign(total_cols(), 1.0);
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
    compute_primal();
  }

  /// Adopts statuses over (structural vars, all original-row slacks) where
  /// inactive-row slacks are Basic by convention; factorizes.
  bool install_statuses(const std::vector<VarStatus>& st) {
    if (static_cast<int>(st.size()) != slack_end_) return false;
    perturbed_ = false;
    drop_artificials();
    vstat_ = st;
    int count = 0;
    for (int j = 0; j < n_; ++j) count += vstat_[j] == VarStatus::Basic ? 1 : 0;
    for (int i = 0; i < m_; ++i) count += vstat_[n_ + active_[i]] == VarStatus::Basic ? 1 : 0;
    if (count != m_) return false;
    sanitize_nonbasic();
    rebuild_basis_arrays();
    devex_.assign(total_cols(), 1.0);
    if (!factorize()) return false;
    compute_primal();
    return true;
  }

  /// Adopts statuses plus a basis inverse without refactorizing; validated by
  /// a residual check with a factorization fallback.
  bool install_capsule(const std::vector<VarStatus>& st, const std::vector<double>& binv) {
    if (static_cast<int>(st.size()) != slack_end_) return false;
    if (binv.size() != static_cast<size_t>(m_) * m_) return false;
    perturbed_ = false;
    drop_artificials();
    vstat_ = st;
    int count = 0;
    for (int j = 0; j < n_; ++j) count += vstat_[j] == VarStatus::Basic ? 1 : 0;
    for (int i = 0; i < m_; ++i) count += vstat_[n_ + active_[i]] == VarStatus::Basic ? 1 : 0;
    if (count != m_) return false;
    sanitize_nonbasic();
    rebuild_basis_arrays();
    devex_.assign(total_cols(), 1.0);
    binv_ = binv;
    compute_primal();
    if (system_residual() > 1e-7 * (1.0 + rhs_scale())) {
      if (!factorize()) return false;
      compute_primal();
      if (system_residual() > 1e-7 * (1.0 + rhs_scale())) return false;
    }
    return true;
  }

  /// Appends rows with their slacks basic; the inverse grows by a border
  /// update and existing values are untouched.
  void add_active_rows(const std::vector<int>& rows) {
    if (rows.empty()) return;
    int k = static_cast<int>(rows.size());
    int m_old = m_;
    std::vector<double> old_binv = std::move(binv_);

    for (int r : rows) {
      pos_in_active_[r] = static_cast<int>(active_.size());
      active_.push_back(r);
      rhs_.push_back(lp_.rows[r].rhs);
    }
    m_ += k;
    build_columns();

    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_old; ++i)
      std::copy(old_binv.begin() + static_cast<size_t>(i) * m_old,
                old_binv.begin() + static_cast<size_t>(i) * m_old + m_old,
                binv_.begin() + static_cast<size_t>(i) * m_);
    for (int nr = 0; nr < k; ++nr) {
      double* out = &binv_[static_cast<size_t>(m_old + nr) * m_];
      for (const Entry& e : lp_.rows[active_[m_old + nr]].coeffs) {
        int pos = pos_of_[e.col];
        if (pos < 0) continue;
        const double* brow = &binv_[static_cast<size_t>(pos) * m_];
        double f = e.val;
        for (int c = 0; c < m_old; ++c) out[c] -= f * brow[c];
      }
      out[m_old + nr] = 1.0;
    }

    for (int i = m_old; i < m_; ++i) {
      int s = n_ + active_[i];
      vstat_[s] = VarStatus::Basic;
      basic_var_.push_back(s);
      pos_of_[s] = i;
      double act = 0.0;
      for (const Entry& e : lp_.rows[active_[i]].coeffs) act += e.val * xval_[e.col];
      xval_[s] = rhs_[i] - act;
    }
  }

  Outcome run() {
    long max_iters = opt_.max_iters > 0 ? opt_.max_iters : 5000 + 40L * (n_ + m_);
    int degen_streak = 0;
    int since_refactor = 0;
    int resets = 0;
    int perturbs = 0;
    std::vector<double> w;

    // A dual-feasible basis with primal violations (warm starts after bound
    // or rhs changes) re-optimizes by dual pivots; everything else goes
    // through the artificial-variable primal path.
    if (has_infeasible_basics() && n_art_ == 0) {
      DualOutcome dual = dual_run(max_iters);
      if (dual == DualOutcome::Infeasible) return Outcome::Infeasible;
      // Feasible or NotApplicable: fall through to the primal loop.
    }
    repair_infeasible_basics();

    for (long iter = 0; iter < max_iters; ++iter) {
      ++iterations_;
      if (since_refactor >= opt_.refactor_every) {
        refactor_or_reset(&resets);
        since_refactor = 0;
        repair_infeasible_basics();
      }

      if (degen_streak >= 200 && perturbs < 3 && !perturbed_) {
        perturb_basic_bounds(perturbs);
        ++perturbs;
        degen_streak = 0;
      }

      retire_zero_artificials();
      bool art_phase = artificial_total() > opt_.feas_tol;
      price(art_phase);

      bool bland = degen_streak >= opt_.bland_after;
      int entering = choose_entering(bland);
      if (entering < 0) {
        if (perturbed_) {
          restore_bounds();
          repair_infeasible_basics();
          degen_streak = 0;
          continue;
        }
        if (system_residual() > 1e-8 * (1.0 + rhs_scale())) {
          refactor_or_reset(&resets);
          since_refactor = 0;
          repair_infeasible_basics();
          continue;
        }
        if (art_phase) return Outcome::Infeasible;
        if (has_infeasible_basics()) {  // numerical drift: repair and continue
          repair_infeasible_basics();
          continue;
        }
        return Outcome::Optimal;
      }

      int dir = entering_direction(entering);
      ftran(entering, w);

      RatioResult rr = ratio_test(entering, dir, w, bland);
      if (rr.unbounded) {
        if (art_phase) {
          // The artificial objective is bounded below by zero; numerical only.
          if (++resets > 5) throw SolveError("simplex: artificial phase claims unbounded");
          install_slack();
          repair_infeasible_basics();
          continue;
        }
        save_ray(entering, dir, w);
        return Outcome::Unbounded;
      }

      if (rr.t <= kDegenTol)
        ++degen_streak;
      else
        degen_streak = 0;

      if (rr.flip) {
        apply_flip(entering, dir, rr.t, w);
      } else {
        if (std::abs(w[rr.leave_pos]) < 1e-8) {
          refactor_or_reset(&resets);
          since_refactor = 0;
          repair_infeasible_basics();
          continue;
        }
        int leave_pos = rr.leave_pos;
        apply_pivot(entering, dir, rr, w);
        update_devex(entering, leave_pos, w);
        ++since_refactor;
      }
    }
    throw SolveError("simplex: iteration limit exhausted (" + std::to_string(max_iters) + ")");
  }

  enum class DualOutcome { Feasible, Infeasible, NotApplicable };

  /// Bounded-variable dual simplex: repairs primal violations while keeping
  /// the reduced costs sign-feasible. Entering steps beyond a finite span
  /// become bound flips. Returns Infeasible with a row certificate when a
  /// violated basic admits no entering column.
  DualOutcome dual_run(long max_iters) {
    std::vector<double> w;
    std::vector<double> alpha(total_cols(), 0.0);
    int degen = 0;
    price(false);
    if (!dual_feasible()) return DualOutcome::NotApplicable;
    long reprice_at = 64;
    for (long it = 0; it < max_iters; ++it) {
      if (it == reprice_at) {  // periodic exact reprice against drift
        price(false);
        reprice_at += 64;
      }
      ++iterations_;

      bool bland = degen >= opt_.bland_after;
      int leave_pos = -1;
      double worst = opt_.feas_tol;
      bool below = false;
      for (int i = 0; i < m_; ++i) {
        int j = basic_var_[i];
        double v;
        bool b;
        if (xval_[j] < lo_[j] - opt_.feas_tol) {
          v = lo_[j] - xval_[j];
          b = true;
        } else if (xval_[j] > hi_[j] + opt_.feas_tol) {
          v = xval_[j] - hi_[j];
          b = false;
        } else {
          continue;
        }
        bool take;
        if (leave_pos < 0)
          take = true;
        else if (bland)
          take = j < basic_var_[leave_pos];
        else
          take = v > worst + 1e-15;
        if (take) {
          leave_pos = i;
          worst = v;
          below = b;
        }
      }
      if (leave_pos < 0) return DualOutcome::Feasible;

      const double* beta = &binv_[static_cast<size_t>(leave_pos) * m_];
      alpha.assign(total_cols(), 0.0);
      int enter = -1, enter_dir = 0;
      double best_ratio = kInf, best_alpha = 0.0;
      for (int j = 0; j < total_cols(); ++j) {
        if (!column_in_system(j) || vstat_[j] == VarStatus::Basic) continue;
        if (j >= slack_end_) continue;  // artificials never re-enter
        if (lo_[j] >= hi_[j] && std::isfinite(lo_[j])) continue;
        double a = 0.0;
        for_column(j, [&](int r, double v) { a += beta[r] * v; });
        alpha[j] = a;
        if (std::abs(a) <= kPivotTol) continue;
        int dir;
        if (vstat_[j] == VarStatus::AtLower)
          dir = 1;
        else if (vstat_[j] == VarStatus::AtUpper)
          dir = -1;
        else
          dir = below ? (a < 0 ? 1 : -1) : (a > 0 ? 1 : -1);
        double ad = a * dir;
        if (below ? ad >= -kPivotTol : ad <= kPivotTol) continue;
        double ratio = std::abs(dvec_[j]) / std::abs(a);
        bool take;
        if (enter < 0)
          take = true;
        else if (ratio < best_ratio - 1e-12)
          take = true;
        else if (ratio <= best_ratio + 1e-12)
          take = bland ? j < enter : std::abs(a) > std::abs(best_alpha) + 1e-15;
        else
          take = false;
        if (take) {
          enter = j;
          enter_dir = dir;
          best_ratio = ratio;
          best_alpha = a;
        }
      }
      if (enter < 0) {
        dual_farkas_.assign(m_, 0.0);
        for (int k = 0; k < m_; ++k) dual_farkas_[k] = below ? beta[k] : -beta[k];
        return DualOutcome::Infeasible;
      }

      ftran(enter, w);
      double aw = w[leave_pos];
      if (std::abs(aw) < 1e-9) return DualOutcome::NotApplicable;
      int jl = basic_var_[leave_pos];
      double target = below ? lo_[jl] : hi_[jl];
      double delta = (xval_[jl] - target) / aw;
      if (delta * enter_dir < 0) return DualOutcome::NotApplicable;  // numerical disagreement

      double span = hi_[enter] - lo_[enter];
      if (std::isfinite(span) && std::abs(delta) > span + kTieTol) {
        apply_flip(enter, enter_dir, span, w);
        ++degen;  // flips do not resolve the violation by themselves
        continue;
      }
      if (std::abs(delta) <= kDegenTol)
        ++degen;
      else
        degen = 0;
      RatioResult rr;
      rr.t = std::abs(delta);
      rr.leave_pos = leave_pos;
      rr.leave_to_lower = below;
      apply_pivot(enter, enter_dir, rr, w);

      // Reduced-cost update along the pivot row; the entering column zeroes
      // out and the leaving variable picks up the negated step.
      double step = dvec_[enter] / alpha[enter];
      for (int j = 0; j < total_cols(); ++j) {
        if (alpha[j] == 0.0 || j == enter) continue;
        dvec_[j] -= step * alpha[j];
      }
      dvec_[jl] = -step;
      dvec_[enter] = 0.0;
    }
    throw SolveError("simplex: dual iteration limit exhausted");
  }

  bool dual_feasible() const {
    for (int j = 0; j < total_cols(); ++j) {
      if (!column_in_system(j) || vstat_[j] == VarStatus::Basic) continue;
      double tol = 1e-7 * (1.0 + std::abs(j < slack_end_ ? cost_[j] : 0.0));
      switch (vstat_[j]) {
        case VarStatus::AtLower:
          if (dvec_[j] < -tol) return false;
          break;
        case VarStatus::AtUpper:
          if (dvec_[j] > tol) return false;
          break;
        case VarStatus::FreeNonbasic:
          if (std::abs(dvec_[j]) > tol) return false;
          break;
        case VarStatus::Basic: break;
      }
    }
    return true;
  }

  // Extraction ---------------------------------------------------------

  double objective_value() const {
    double obj = lp_.objective_constant;
    for (int j = 0; j < n_; ++j) obj += lp_.objective[j] * xval_[j];
    return obj;
  }

  std::vector<double> structural_primal() const {
    return std::vector<double>(xval_.begin(), xval_.begin() + n_);
  }

  void duals_and_reduced(std::vector<double>& y, std::vector<double>& d) {
    price(false);
    y = y_;
    d.assign(dvec_.begin(), dvec_.begin() + n_);
    for (int j = 0; j < n_; ++j)
      if (vstat_[j] == VarStatus::Basic) d[j] = 0.0;
  }

  std::vector<double> farkas() {
    if (!dual_farkas_.empty()) return dual_farkas_;
    price(true);
    std::vector<double> f(m_);
    for (int i = 0; i < m_; ++i) f[i] = -y_[i];
    return f;
  }

  const std::vector<double>& ray() const { return ray_; }

  bool has_basic_artificial() const {
    for (int j : basic_var_)
      if (j >= slack_end_ && std::abs(xval_[j]) > opt_.feas_tol) return true;
    return false;
  }

  bool any_artificial_in_basis() const {
    for (int j : basic_var_)
      if (j >= slack_end_) return true;
    return false;
  }

  /// Swaps remaining zero-valued basic artificials for nonbasic real columns
  /// via degenerate pivots so the basis becomes exportable. The primal point
  /// is unchanged; candidates with the smallest reduced cost keep the basis
  /// as close to dual feasible as possible.
  void purge_artificial_basics() {
    if (!any_artificial_in_basis()) return;
    price(false);
    std::vector<double> w;
    for (int i = 0; i < m_; ++i) {
      int j = basic_var_[i];
      if (j < slack_end_) continue;
      const double* beta = &binv_[static_cast<size_t>(i) * m_];
      int best = -1;
      double best_score = kInf;
      for (int cand = 0; cand < slack_end_; ++cand) {
        if (!column_in_system(cand) || vstat_[cand] == VarStatus::Basic) continue;
        double a = 0.0;
        for_column(cand, [&](int r, double v) { a += beta[r] * v; });
        if (std::abs(a) < 1e-7) continue;
        double score = std::abs(dvec_[cand]) / std::abs(a);
        if (score < best_score - 1e-15) {
          best_score = score;
          best = cand;
        }
      }
      if (best < 0) continue;  // dependent row; capsule export stays disabled
      ftran(best, w);
      if (std::abs(w[i]) < 1e-8) continue;
      RatioResult rr;
      rr.t = 0.0;
      rr.leave_pos = i;
      rr.leave_to_lower = true;  // artificial bounds are pinned to [0,0]
      int dir = vstat_[best] == VarStatus::AtUpper ? -1 : 1;
      apply_pivot(best, dir, rr, w);
    }
  }

  /// Status export over (structural vars, all original-row slacks); inactive
  /// slacks report Basic by convention.
  void export_statuses(std::vector<VarStatus>& st) const {
    st.assign(slack_end_, VarStatus::Basic);
    for (int j = 0; j < slack_end_; ++j)
      if (column_in_system(j)) st[j] = vstat_[j];
  }

  const std::vector<double>& binv() const { return binv_; }

private:
  struct RatioResult {
    double t = kInf;
    int leave_pos = -1;
    bool leave_to_lower = false;
    bool flip = false;
    bool unbounded = false;
  };

  int total_cols() const { return slack_end_ + n_art_; }

  bool column_in_system(int j) const {
    if (j < n_) return true;
    if (j < slack_end_) return pos_in_active_[j - n_] >= 0;
    return true;  // artificial
  }

  void set_slack_bounds(int r) {
    int s = n_ + r;
    switch (lp_.rows[r].sense) {
      case Sense::LE:
        lo_[s] = 0.0;
        hi_[s] = kInf;
        break;
      case Sense::EQ:
        lo_[s] = 0.0;
        hi_[s] = 0.0;
        break;
      case Sense::GE:
        lo_[s] = -kInf;
        hi_[s] = 0.0;
        break;
    }
    cost_[s] = 0.0;
  }

  void build_columns() {
    std::vector<int> counts(n_, 0);
    for (int i = 0; i < m_; ++i)
      for (const Entry& e : lp_.rows[active_[i]].coeffs) ++counts[e.col];
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j];
    col_row_.resize(col_start_[n_]);
    col_val_.resize(col_start_[n_]);
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int i = 0; i < m_; ++i) {
      for (const Entry& e : lp_.rows[active_[i]].coeffs) {
        int k = fill[e.col]++;
        col_row_[k] = i;
        col_val_[k] = e.val;
      }
    }
  }

  template <typename Fn>
  void for_column(int j, Fn&& fn) const {
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) fn(col_row_[k], col_val_[k]);
    } else if (j < slack_end_) {
      int pos = pos_in_active_[j - n_];
      if (pos >= 0) fn(pos, 1.0);
    } else {
      int a = j - slack_end_;
      for (int k = art_start_[a]; k < art_start_[a + 1]; ++k) fn(art_pos_[k], art_val_[k]);
    }
  }

  VarStatus default_nonbasic_status(int j) const {
    bool lo_fin = std::isfinite(lo_[j]);
    bool hi_fin = std::isfinite(hi_[j]);
    if (!lo_fin && !hi_fin) return VarStatus::FreeNonbasic;
    if (!lo_fin) return VarStatus::AtUpper;
    if (!hi_fin) return VarStatus::AtLower;
    return std::abs(lo_[j]) <= std::abs(hi_[j]) ? VarStatus::AtLower : VarStatus::AtUpper;
  }

  void sanitize_nonbasic() {
    for (int j = 0; j < total_cols(); ++j) {
      if (vstat_[j] == VarStatus::Basic) continue;
      if (vstat_[j] == VarStatus::AtLower && !std::isfinite(lo_[j]))
        vstat_[j] = default_nonbasic_status(j);
      else if (vstat_[j] == VarStatus::AtUpper && !std::isfinite(hi_[j]))
        vstat_[j] = default_nonbasic_status(j);
    }
  }

  void rebuild_basis_arrays() {
    basic_var_.clear();
    pos_of_.assign(total_cols(), -1);
    for (int j = 0; j < total_cols(); ++j) {
      if (!column_in_system(j)) continue;
      if (vstat_[j] == VarStatus::Basic) {
        pos_of_[j] = static_cast<int>(basic_var_.size());
        basic_var_.push_back(j);
      }
    }
  }

  bool factorize() {
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    std::vector<double> mat(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      for_column(basic_var_[i], [&](int r, double v) { mat[static_cast<size_t>(r) * m_ + i] = v; });
      binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
    }
    for (int col = 0; col < m_; ++col) {
      int piv = -1;
      double best = 1e-11;
      for (int r = col; r < m_; ++r) {
        double a = std::abs(mat[static_cast<size_t>(r) * m_ + col]);
        if (a > best) {
          best = a;
          piv = r;
        }
      }
      if (piv < 0) return false;
      if (piv != col) {
        for (int k = 0; k < m_; ++k) {
          std::swap(mat[static_cast<size_t>(piv) * m_ + k], mat[static_cast<size_t>(col) * m_ + k]);
          std::swap(binv_[static_cast<size_t>(piv) * m_ + k],
                    binv_[static_cast<size_t>(col) * m_ + k]);
        }
      }
      double inv = 1.0 / mat[static_cast<size_t>(col) * m_ + col];
      double* mrow = &mat[static_cast<size_t>(col) * m_];
      double* brow = &binv_[static_cast<size_t>(col) * m_];
      for (int k = 0; k < m_; ++k) {
        mrow[k] *= inv;
        brow[k] *= inv;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == col) continue;
        double f = mat[static_cast<size_t>(r) * m_ + col];
        if (f == 0.0) continue;
        double* mr = &mat[static_cast<size_t>(r) * m_];
        double* br = &binv_[static_cast<size_t>(r) * m_];
        for (int k = 0; k < m_; ++k) {
          mr[k] -= f * mrow[k];
          br[k] -= f * brow[k];
        }
      }
    }
    return true;
  }

  void refactor_or_reset(int* resets) {
    if (factorize()) {
      compute_primal();
      return;
    }
    if (++(*resets) > 8) throw SolveError("simplex: repeated basis failures");
    install_slack();
  }

  double nonbasic_value(int j) const {
    switch (vstat_[j]) {
      case VarStatus::AtLower: return lo_[j];
      case VarStatus::AtUpper: return hi_[j];
      case VarStatus::FreeNonbasic: return 0.0;
      case VarStatus::Basic: break;
    }
    return 0.0;
  }

  void compute_primal() {
    xval_.assign(total_cols(), 0.0);
    std::vector<double> resid = rhs_;
    for (int j = 0; j < total_cols(); ++j) {
      if (!column_in_system(j) || vstat_[j] == VarStatus::Basic) continue;
      double v = nonbasic_value(j);
      xval_[j] = v;
      if (v != 0.0) for_column(j, [&](int r, double a) { resid[r] -= a * v; });
    }
    for (int i = 0; i < m_; ++i) {
      const double* row = &binv_[static_cast<size_t>(i) * m_];
      double s = 0.0;
      for (int k = 0; k < m_; ++k) s += row[k] * resid[k];
      xval_[basic_var_[i]] = s;
    }
  }

  double rhs_scale() const {
    double s = 0.0;
    for (double b : rhs_) s = std::max(s, std::abs(b));
    return s;
  }

  double system_residual() const {
    std::vector<double> act(m_, 0.0);
    for (int j = 0; j < total_cols(); ++j) {
      if (!column_in_system(j)) continue;
      double v = xval_[j];
      if (v == 0.0) continue;
      for_column(j, [&](int r, double a) { act[r] += a * v; });
    }
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) worst = std::max(worst, std::abs(act[i] - rhs_[i]));
    return worst;
  }

  bool has_infeasible_basics() const {
    for (int i = 0; i < m_; ++i) {
      int j = basic_var_[i];
      if (xval_[j] < lo_[j] - opt_.feas_tol || xval_[j] > hi_[j] + opt_.feas_tol) return true;
    }
    return false;
  }

  /// Swaps every out-of-bounds basic variable for a fresh one-sided
  /// artificial carrying the same column, leaving the basis matrix and its
  /// inverse untouched and every basic value feasible.
  void repair_infeasible_basics() {
    for (int i = 0; i < m_; ++i) {
      int j = basic_var_[i];
      double x = xval_[j];
      bool below = x < lo_[j] - opt_.feas_tol;
      bool above = x > hi_[j] + opt_.feas_tol;
      if (!below && !above) continue;

      int a_col = slack_end_ + n_art_;
      ++n_art_;
      for_column(j, [&](int r, double v) {
        art_pos_.push_back(r);
        art_val_.push_back(v);
      });
      art_start_.push_back(static_cast<int>(art_pos_.size()));

      double bound = below ? lo_[j] : hi_[j];
      lo_.push_back(below ? -kInf : 0.0);
      hi_.push_back(below ? 0.0 : kInf);
      cost_.push_back(0.0);
      vstat_.push_back(VarStatus::Basic);
      devex_.push_back(1.0);
      pos_of_.push_back(i);
      xval_.push_back(x - bound);
      dvec_.push_back(0.0);

      vstat_[j] = below ? VarStatus::AtLower : VarStatus::AtUpper;
      pos_of_[j] = -1;
      xval_[j] = bound;
      basic_var_[i] = a_col;
    }
  }

  double artificial_total() const {
    double t = 0.0;
    for (int a = 0; a < n_art_; ++a) t += std::abs(xval_[slack_end_ + a]);
    return t;
  }

  /// Pins every artificial that has reached zero so later pivots can never
  /// re-inflate it; the true problem has no such column.
  void retire_zero_artificials() {
    for (int a = 0; a < n_art_; ++a) {
      int j = slack_end_ + a;
      if (lo_[j] == 0.0 && hi_[j] == 0.0) continue;  // already pinned
      if (std::abs(xval_[j]) > opt_.feas_tol) continue;
      lo_[j] = 0.0;
      hi_[j] = 0.0;
      if (vstat_[j] != VarStatus::Basic) {
        vstat_[j] = VarStatus::AtLower;
        xval_[j] = 0.0;
      }
    }
  }

  void drop_artificials() {
    n_art_ = 0;
    art_start_ = {0};
    art_pos_.clear();
    art_val_.clear();
    lo_.resize(slack_end_);
    hi_.resize(slack_end_);
    cost_.resize(slack_end_);
    if (static_cast<int>(vstat_.size()) > slack_end_) vstat_.resize(slack_end_);
    if (static_cast<int>(xval_.size()) > slack_end_) xval_.resize(slack_end_);
    if (static_cast<int>(devex_.size()) > slack_end_) devex_.resize(slack_end_);
    if (static_cast<int>(pos_of_.size()) > slack_end_) pos_of_.resize(slack_end_);
  }

  static double hash01(int j) {
    std::uint64_t z = static_cast<std::uint64_t>(j) + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

  void perturb_basic_bounds(int round) {
    double base = 1e-8 * (1 << round);
    for (int i = 0; i < m_; ++i) {
      int j = basic_var_[i];
      if (j >= slack_end_) continue;  // never loosen artificials
      double jitter = base * (0.5 + hash01(j)) * (1.0 + std::abs(xval_[j]));
      if (std::isfinite(lo_[j])) lo_[j] -= jitter;
      if (std::isfinite(hi_[j])) hi_[j] += jitter;
    }
    perturbed_ = true;
  }

  void restore_bounds() {
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
    }
    for (int r = 0; r < nrows_; ++r) set_slack_bounds(r);
    for (int j = 0; j < total_cols(); ++j) {
      if (!column_in_system(j) || vstat_[j] == VarStatus::Basic) continue;
      xval_[j] = nonbasic_value(j);
    }
    compute_primal();
    perturbed_ = false;
  }

  double phase_cost(int j, bool art_phase) const {
    if (art_phase) {
      if (j < slack_end_) return 0.0;
      // One-sided artificials: negative-side columns carry -1 (minimizing
      // -u drives u in (-inf, 0] up to zero), positive-side carry +1.
      return hi_[j] == 0.0 ? -1.0 : 1.0;
    }
    return j < slack_end_ ? cost_[j] : 0.0;
  }

  void price(bool art_phase) {
    y_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      int j = basic_var_[i];
      double cb = phase_cost(j, art_phase);
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) y_[k] += cb * row[k];
    }
    dvec_.assign(total_cols(), 0.0);
    art_pricing_ = art_phase;
    for (int j = 0; j < total_cols(); ++j) {
      if (!column_in_system(j) || vstat_[j] == VarStatus::Basic) continue;
      double d = phase_cost(j, art_phase);
      for_column(j, [&](int r, double a) { d -= y_[r] * a; });
      dvec_[j] = d;
    }
  }

  double entering_threshold(int j) const {
    double scale = art_pricing_ || j >= slack_end_ ? 1.0 : 1.0 + std::abs(cost_[j]);
    return opt_.opt_tol * scale;
  }

  bool eligible(int j, int* dir) const {
    if (!column_in_system(j) || vstat_[j] == VarStatus::Basic) return false;
    if (!art_pricing_ && j >= slack_end_) return false;  // artificials stay out
    if (lo_[j] >= hi_[j] && std::isfinite(lo_[j])) return false;  // fixed
    double d = dvec_[j];
    double tol = entering_threshold(j);
    switch (vstat_[j]) {
      case VarStatus::AtLower:
        if (d < -tol) {
          *dir = 1;
          return true;
        }
        return false;
      case VarStatus::AtUpper:
        if (d > tol) {
          *dir = -1;
          return true;
        }
        return false;
      case VarStatus::FreeNonbasic:
        if (d < -tol) {
          *dir = 1;
          return true;
        }
        if (d > tol) {
          *dir = -1;
          return true;
        }
        return false;
      case VarStatus::Basic: break;
    }
    return false;
  }

  int choose_entering(bool bland) const {
    int dir = 0;
    if (bland) {
      for (int j = 0; j < total_cols(); ++j)
        if (eligible(j, &dir)) return j;
      return -1;
    }
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < total_cols(); ++j) {
      if (!eligible(j, &dir)) continue;
      double score = dvec_[j] * dvec_[j] / devex_[j];
      if (score > best_score * (1.0 + 1e-12)) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  void update_devex(int entering, int leave_pos, const std::vector<double>& w) {
    double alpha_q = w[leave_pos];
    if (std::abs(alpha_q) < 1e-12) return;
    double gamma_q = std::max(devex_[entering], 1.0);
    double ratio = gamma_q / (alpha_q * alpha_q);
    const double* prow = &binv_[static_cast<size_t>(leave_pos) * m_];
    double worst = 0.0;
    for (int j = 0; j < total_cols(); ++j) {
      if (!column_in_system(j) || vstat_[j] == VarStatus::Basic || j == entering) continue;
      double beta = 0.0;
      for_column(j, [&](int r, double a) { beta += prow[r] * a; });
      if (beta == 0.0) continue;
      double cand = beta * beta * alpha_q * alpha_q * ratio;
      if (cand > devex_[j]) devex_[j] = cand;
      worst = std::max(worst, devex_[j]);
    }
    devex_[entering] = 1.0;
    if (worst > 1e8) devex_.assign(total_cols(), 1.0);
  }

  int entering_direction(int j) const {
    switch (vstat_[j]) {
      case VarStatus::AtLower: return 1;
      case VarStatus::AtUpper: return -1;
      case VarStatus::FreeNonbasic: return dvec_[j] < 0 ? 1 : -1;
      case VarStatus::Basic: break;
    }
    return 1;
  }

  void ftran(int j, std::vector<double>& w) const {
    w.assign(m_, 0.0);
    for_column(j, [&](int r, double a) {
      if (a == 0.0) return;
      for (int i = 0; i < m_; ++i) w[i] += binv_[static_cast<size_t>(i) * m_ + r] * a;
    });
  }

  RatioResult ratio_test(int entering, int dir, const std::vector<double>& w, bool bland) const {
    RatioResult rr;
    double span = hi_[entering] - lo_[entering];
    double flip_t = std::isfinite(span) ? span : kInf;

    double best_t = kInf;
    int best_pos = -1;
    bool best_to_lower = false;
    double best_w = 0.0;

    for (int i = 0; i < m_; ++i) {
      double wi = w[i] * dir;
      if (std::abs(wi) <= kPivotTol) continue;
      int j = basic_var_[i];
      double x = xval_[j];
      double t = kInf;
      bool to_lower = false;
      if (wi > kPivotTol) {
        if (std::isfinite(lo_[j])) {
          t = (x - lo_[j]) / wi;
          to_lower = true;
        }
      } else {
        if (std::isfinite(hi_[j])) {
          t = (hi_[j] - x) / (-wi);
          to_lower = false;
        }
      }
      if (t == kInf) continue;
      if (t < 0) t = 0;

      bool take = false;
      if (best_pos < 0) {
        take = true;
      } else {
        double window = kTieTol * (1.0 + best_t);
        if (t < best_t - window) {
          take = true;
        } else if (t <= best_t + window) {
          if (bland)
            take = basic_var_[i] < basic_var_[best_pos];
          else
            take = std::abs(wi) > std::abs(best_w) + 1e-15;
        }
      }
      if (take) {
        best_t = best_pos < 0 ? t : std::min(best_t, t);
        best_pos = i;
        best_to_lower = to_lower;
        best_w = wi;
      }
    }

    if (best_pos < 0 && flip_t == kInf) {
      rr.unbounded = true;
      return rr;
    }
    if (best_pos < 0 || flip_t < best_t - kTieTol) {
      rr.flip = true;
      rr.t = flip_t;
      return rr;
    }
    rr.t = best_t;
    rr.leave_pos = best_pos;
    rr.leave_to_lower = best_to_lower;
    return rr;
  }

  void apply_flip(int entering, int dir, double t, const std::vector<double>& w) {
    double delta = dir * t;
    xval_[entering] += delta;
    for (int i = 0; i < m_; ++i) xval_[basic_var_[i]] -= w[i] * delta;
    vstat_[entering] =
        vstat_[entering] == VarStatus::AtLower ? VarStatus::AtUpper : VarStatus::AtLower;
    xval_[entering] = vstat_[entering] == VarStatus::AtLower ? lo_[entering] : hi_[entering];
  }

  void apply_pivot(int entering, int dir, const RatioResult& rr, const std::vector<double>& w) {
    int r = rr.leave_pos;
    int leaving = basic_var_[r];
    double delta = dir * rr.t;

    xval_[entering] = nonbasic_value(entering) + delta;
    for (int i = 0; i < m_; ++i) xval_[basic_var_[i]] -= w[i] * delta;
    xval_[leaving] = rr.leave_to_lower ? lo_[leaving] : hi_[leaving];
    vstat_[leaving] = rr.leave_to_lower ? VarStatus::AtLower : VarStatus::AtUpper;

    vstat_[entering] = VarStatus::Basic;
    basic_var_[r] = entering;
    pos_of_[entering] = r;
    pos_of_[leaving] = -1;

    double piv = w[r];
    double* prow = &binv_[static_cast<size_t>(r) * m_];
    double inv = 1.0 / piv;
    for (int k = 0; k < m_; ++k) prow[k] *= inv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double f = w[i];
      if (f == 0.0) continue;
      double* row = &binv_[static_cast<size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
  }

  void save_ray(int entering, int dir, const std::vector<double>& w) {
    ray_.assign(n_, 0.0);
    if (entering < n_) ray_[entering] = dir;
    for (int i = 0; i < m_; ++i) {
      int j = basic_var_[i];
      if (j < n_) ray_[j] = -w[i] * dir;
    }
  }

  const LinearProgram& lp_;
  SimplexOptions opt_;
  int n_ = 0, nrows_ = 0, slack_end_ = 0, m_ = 0;
  std::vector<int> active_, pos_in_active_;

  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> lo_, hi_, cost_, rhs_;

  int n_art_ = 0;
  std::vector<int> art_start_, art_pos_;
  std::vector<double> art_val_;

  std::vector<VarStatus> vstat_;
  std::vector<int> basic_var_, pos_of_;
  std::vector<double> binv_, xval_, y_, dvec_, ray_, devex_, dual_farkas_;
  bool art_pricing_ = false;
  bool perturbed_ = false;
  long iterations_ = 0;
};

double row_activity(const Row& row, const std::vector<double>& x) {
  double a = 0.0;
  for (const Entry& e : row.coeffs) a += e.val * x[e.col];
  return a;
}

double row_violation(const Row& row, double activity) {
  switch (row.sense) {
    case Sense::LE: return activity - row.rhs;
    case Sense::GE: return row.rhs - activity;
    case Sense::EQ: return std::abs(activity - row.rhs);
  }
  return 0.0;
}

struct WarmInput {
  const Basis* basis = nullptr;
  const WarmCapsule* capsule = nullptr;
};

LpSolution solve_common(const LinearProgram& lp, const SimplexOptions& opt, WarmInput warm,
                        Basis* out_basis, WarmCapsule* out_capsule) {
  lp.validate();
  int m_total = static_cast<int>(lp.rows.size());
  int n = lp.num_vars;

  Simplex core(lp, opt);
  std::vector<char> is_active(m_total, 0);

  auto active_listing = [&]() {
    std::vector<int> idx;
    for (int i = 0; i < m_total; ++i)
      if (is_active[i]) idx.push_back(i);
    return idx;
  };

  bool installed = false;
  if (warm.capsule != nullptr && !warm.capsule->empty() && warm.capsule->num_vars == n &&
      static_cast<int>(warm.capsule->status.size()) == n + m_total) {
    bool valid = true;
    std::vector<char> seen(m_total, 0);
    for (int r : warm.capsule->active_rows) {
      if (r < 0 || r >= m_total || seen[r]) {
        valid = false;
        break;
      }
      seen[r] = 1;
    }
    for (int i = 0; valid && i < m_total; ++i)
      if (!lp.rows[i].lazy && !seen[i]) valid = false;
    if (valid) {
      core.set_active(warm.capsule->active_rows);
      for (int r : warm.capsule->active_rows) is_active[r] = 1;
      installed = core.install_capsule(warm.capsule->status, warm.capsule->binv);
      if (!installed) std::fill(is_active.begin(), is_active.end(), 0);
    }
  }
  if (!installed && warm.basis != nullptr && !warm.basis->empty() &&
      static_cast<int>(warm.basis->status.size()) == n + m_total) {
    for (int i = 0; i < m_total; ++i)
      is_active[i] = !lp.rows[i].lazy || warm.basis->status[n + i] != VarStatus::Basic ? 1 : 0;
    core.set_active(active_listing());
    installed = core.install_statuses(warm.basis->status);
    if (!installed) std::fill(is_active.begin(), is_active.end(), 0);
  }
  if (!installed) {
    for (int i = 0; i < m_total; ++i) is_active[i] = lp.rows[i].lazy && opt.use_lazy_rows ? 0 : 1;
    core.set_active(active_listing());
    core.install_slack();
  }

  auto finalize = [&](LpSolution sol) {
    const auto& idx = core.active();
    if (!sol.duals.empty()) {
      std::vector<double> full(m_total, 0.0);
      for (size_t k = 0; k < idx.size(); ++k) full[idx[k]] = sol.duals[k];
      sol.duals = std::move(full);
    }
    if (!sol.farkas.empty()) {
      std::vector<double> full(m_total, 0.0);
      for (size_t k = 0; k < idx.size(); ++k) full[idx[k]] = sol.farkas[k];
      sol.farkas = std::move(full);
    }
    // A basis still holding an artificial cannot seed warm starts.
    bool clean = !core.any_artificial_in_basis();
    if (out_basis != nullptr) {
      out_basis->status.clear();
      if (clean) core.export_statuses(out_basis->status);
    }
    if (out_capsule != nullptr) {
      *out_capsule = WarmCapsule{};
      if (clean) {
        out_capsule->num_vars = n;
        out_capsule->active_rows = idx;
        core.export_statuses(out_capsule->status);
        out_capsule->binv = core.binv();
      }
    }
    return sol;
  };

  for (int round = 0; round < 400; ++round) {
    Simplex::Outcome outcome = core.run();

    if (outcome == Simplex::Outcome::Infeasible) {
      LpSolution sol;
      sol.status = LpStatus::Infeasible;
      sol.iterations = core.iterations();
      sol.farkas = core.farkas();
      sol.primal = core.structural_primal();
      return finalize(std::move(sol));
    }


    if (outcome == Simplex::Outcome::Unbounded) {
      const auto& ray = core.ray();
      std::vector<int> add;
      for (int i = 0; i < m_total; ++i) {
        if (is_active[i]) continue;
        double dirv = row_activity(lp.rows[i], ray);
        bool bad = (lp.rows[i].sense == Sense::LE && dirv > opt.feas_tol) ||
                   (lp.rows[i].sense == Sense::GE && dirv < -opt.feas_tol) ||
                   (lp.rows[i].sense == Sense::EQ && std::abs(dirv) > opt.feas_tol);
        if (bad) {
          add.push_back(i);
          is_active[i] = 1;
        }
      }
      if (add.empty()) {
        LpSolution sol;
        sol.status = LpStatus::Unbounded;
        sol.iterations = core.iterations();
        sol.ray = ray;
        sol.primal = core.structural_primal();
        return finalize(std::move(sol));
      }
      core.add_active_rows(add);
      continue;
    }

    auto primal = core.structural_primal();
    std::vector<int> add;
    for (int i = 0; i < m_total; ++i) {
      if (is_active[i]) continue;
      double act = row_activity(lp.rows[i], primal);
      if (row_violation(lp.rows[i], act) > opt.feas_tol * (1.0 + std::abs(lp.rows[i].rhs)) * 10) {
        add.push_back(i);
        is_active[i] = 1;
      }
    }
    if (add.empty()) {
      LpSolution sol;
      sol.status = LpStatus::Optimal;
      sol.iterations = core.iterations();
      sol.primal = std::move(primal);
      core.duals_and_reduced(sol.duals, sol.reduced_costs);
      sol.objective = core.objective_value();
      core.purge_artificial_basics();
      return finalize(std::move(sol));
    }
    core.add_active_rows(add);
  }
  throw SolveError("simplex: lazy row activation did not converge");
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt) {
  return solve_common(lp, opt, {}, nullptr, nullptr);
}

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt, const Basis* warm,
                    Basis* out_basis) {
  WarmInput w;
  w.basis = warm;
  return solve_common(lp, opt, w, out_basis, nullptr);
}

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt, const WarmCapsule* warm,
                    WarmCapsule* out_capsule) {
  WarmInput w;
  w.capsule = warm;
  return solve_common(lp, opt, w, nullptr, out_capsule);
}

DualCheckReport dual_check(const LinearProgram& lp, const LpSolution& sol, double tol) {
  DualCheckReport rep;
  if (sol.status != LpStatus::Optimal) return rep;

  const std::vector<double>& x = sol.primal;
  double worst_primal = 0.0;
  for (int j = 0; j < lp.num_vars; ++j) {
    if (std::isfinite(lp.lower[j])) worst_primal = std::max(worst_primal, lp.lower[j] - x[j]);
    if (std::isfinite(lp.upper[j])) worst_primal = std::max(worst_primal, x[j] - lp.upper[j]);
  }
  double worst_compl = 0.0;
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    const Row& row = lp.rows[r];
    double act = 0.0;
    for (const Entry& e : row.coeffs) act += e.val * x[e.col];
    double scale = 1.0 + std::abs(row.rhs);
    double viol = 0.0;
    switch (row.sense) {
      case Sense::LE: viol = act - row.rhs; break;
      case Sense::GE: viol = row.rhs - act; break;
      case Sense::EQ: viol = std::abs(act - row.rhs); break;
    }
    worst_primal = std::max(worst_primal, viol / scale);
    double slack = std::abs(act - row.rhs);
    worst_compl = std::max(worst_compl, slack * std::abs(sol.duals[r]) /
                                            (scale * (1.0 + std::abs(sol.duals[r]))));
  }

  double worst_dual = 0.0;
  std::vector<double> d(lp.num_vars);
  for (int j = 0; j < lp.num_vars; ++j) d[j] = lp.objective[j];
  for (size_t r = 0; r < lp.rows.size(); ++r)
    for (const Entry& e : lp.rows[r].coeffs) d[e.col] -= sol.duals[r] * e.val;
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    if (lp.rows[r].sense == Sense::LE) worst_dual = std::max(worst_dual, sol.duals[r]);
    if (lp.rows[r].sense == Sense::GE) worst_dual = std::max(worst_dual, -sol.duals[r]);
  }
  double dual_obj = lp.objective_constant;
  for (size_t r = 0; r < lp.rows.size(); ++r) dual_obj += sol.duals[r] * lp.rows[r].rhs;
  for (int j = 0; j < lp.num_vars; ++j) {
    double scale = 1.0 + std::abs(d[j]);
    bool at_lo =
        std::isfinite(lp.lower[j]) && x[j] <= lp.lower[j] + tol * (1 + std::abs(lp.lower[j]));
    bool at_hi =
        std::isfinite(lp.upper[j]) && x[j] >= lp.upper[j] - tol * (1 + std::abs(lp.upper[j]));
    if (!at_lo && !at_hi) worst_dual = std::max(worst_dual, std::abs(d[j]) / scale);
    else if (at_lo && !at_hi) worst_dual = std::max(worst_dual, -d[j] / scale);
    else if (at_hi && !at_lo) worst_dual = std::max(worst_dual, d[j] / scale);
    if (d[j] > 0 && std::isfinite(lp.lower[j])) dual_obj += d[j] * lp.lower[j];
    if (d[j] < 0 && std::isfinite(lp.upper[j])) dual_obj += d[j] * lp.upper[j];
  }

  rep.worst_primal_residual = worst_primal;
  rep.worst_dual_residual = worst_dual;
  rep.worst_complementarity = worst_compl;
  rep.duality_gap = std::abs(sol.objective - dual_obj) / (1.0 + std::abs(sol.objective));
  rep.pass = worst_primal <= tol && worst_dual <= tol * 10 && rep.duality_gap <= tol;
  return rep;
}

void dump(const LinearProgram& lp, std::ostream& os) {
  os << "min";
  bool first = true;
  for (int j = 0; j < lp.num_vars; ++j) {
    if (lp.objective[j] == 0.0) continue;
    os << (first ? " " : " + ") << lp.objective[j] << " x" << j;
    first = false;
  }
  if (lp.objective_constant != 0.0) os << (first ? " " : " + ") << lp.objective_constant;
  os << "\nsubject to\n";
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    const Row& row = lp.rows[r];
    os << "r" << r;
    if (!row.tag.empty()) os << "[" << row.tag << "]";
    os << ":";
    for (const Entry& e : row.coeffs) os << " " << (e.val >= 0 ? "+" : "") << e.val << " x" << e.col;
    switch (row.sense) {
      case Sense::LE: os << " <= "; break;
      case Sense::EQ: os << " = "; break;
      case Sense::GE: os << " >= "; break;
    }
    os << row.rhs;
    if (row.lazy) os << "  (lazy)";
    os << "\n";
  }
  os << "bounds\n";
  for (int j = 0; j < lp.num_vars; ++j) {
    os << "x" << j;
    if (!lp.var_tags.empty() && !lp.var_tags[j].empty()) os << "[" << lp.var_tags[j] << "]";
    os << " in [" << lp.lower[j] << ", " << lp.upper[j] << "]\n";
  }
}

}  // namespace rpop::lp
