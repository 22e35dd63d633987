#include "otsym/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>

#include "otsym/error.hpp"

namespace otsym {

namespace {

constexpr double kEps = 1e-12;
constexpr double kLarge = std::numeric_limits<double>::infinity();

// Jonker-Volgenant on a dense row-major n x n matrix. x[i] is the column of
// row i, y[j] the row of column j, v the column potentials.
class JonkerVolgenant {
 public:
  JonkerVolgenant(const double* cost, int n)
      : c_(cost), n_(n), x_(n, -1), y_(n, -1), v_(n, 0.0), free_(n), d_(n), pred_(n), cols_(n) {}

  void solve() {
    int n_free = column_reduction();
    for (int pass = 0; pass < 2 && n_free > 0; ++pass) n_free = augmenting_row_reduction(n_free);
    for (int f = 0; f < n_free; ++f) augment(free_[f]);
  }

  const std::vector<int>& x() const { return x_; }
  const std::vector<double>& v() const { return v_; }

 private:
  double cost(int i, int j) const { return c_[static_cast<std::size_t>(i) * n_ + j]; }

  // Column reduction with reduction transfer; returns the number of free rows.
  int column_reduction() {
    std::fill(v_.begin(), v_.end(), kLarge);
    std::vector<int> argmin(n_, 0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        const double cij = cost(i, j);
        if (cij < v_[j]) {
          v_[j] = cij;
          argmin[j] = i;
        }
      }
    std::vector<char> unique(n_, 1);
    for (int j = n_ - 1; j >= 0; --j) {
      const int i = argmin[j];
      if (x_[i] < 0) {
        x_[i] = j;
        y_[j] = i;
      } else {
        unique[i] = 0;
        y_[j] = -1;
      }
    }
    int n_free = 0;
    for (int i = 0; i < n_; ++i) {
      if (x_[i] < 0) {
        free_[n_free++] = i;
      } else if (unique[i]) {
        const int j = x_[i];
        double mn = kLarge;
        for (int j2 = 0; j2 < n_; ++j2)
          if (j2 != j) mn = std::min(mn, cost(i, j2) - v_[j2]);
        if (std::isfinite(mn)) v_[j] -= mn;
      }
    }
    return n_free;
  }

  int augmenting_row_reduction(int n_free) {
    int current = 0;
    int new_free = 0;
    long long iterations = 0;
    while (current < n_free) {
      ++iterations;
      const int fi = free_[current++];
      int j1 = 0;
      double u1 = cost(fi, 0) - v_[0];
      int j2 = -1;
      double u2 = kLarge;
      for (int j = 1; j < n_; ++j) {
        const double h = cost(fi, j) - v_[j];
        if (h < u2) {
          if (h >= u1) {
            u2 = h;
            j2 = j;
          } else {
            u2 = u1;
            u1 = h;
            j2 = j1;
            j1 = j;
          }
        }
      }
      int i0 = y_[j1];
      const bool lowers = j2 >= 0 && u2 - u1 > kEps;
      if (iterations < static_cast<long long>(current) * n_) {  // guards against float cycling
        if (lowers) {
          v_[j1] -= u2 - u1;
        } else if (i0 >= 0 && j2 >= 0) {
          j1 = j2;
          i0 = y_[j2];
        }
        if (i0 >= 0) {
          if (lowers)
            free_[--current] = i0;
          else
            free_[new_free++] = i0;
        }
      } else if (i0 >= 0) {
        free_[new_free++] = i0;
      }
      x_[fi] = j1;
      y_[j1] = fi;
      if (i0 >= 0 && x_[i0] == j1) x_[i0] = -1;
    }
    return new_free;
  }

  // Dijkstra-like shortest augmenting path from a free row.
  void augment(int start) {
    for (int j = 0; j < n_; ++j) {
      cols_[j] = j;
      pred_[j] = start;
      d_[j] = cost(start, j) - v_[j];
    }
    int lo = 0;
    int hi = 0;
    int n_ready = 0;
    int final_j = -1;
    while (final_j < 0) {
      if (lo == hi) {
        n_ready = lo;
        hi = collect_minimum(lo);
        for (int k = lo; k < hi; ++k)
          if (y_[cols_[k]] < 0) {
            final_j = cols_[k];
            break;
          }
      }
      if (final_j < 0) final_j = scan(lo, hi);
    }
    // cols_[lo] can lie outside the ready set once scan() has emptied it.
    const double mind = d_[final_j];
    for (int k = 0; k < n_ready; ++k) {
      const int j = cols_[k];
      v_[j] += d_[j] - mind;
    }
    int i = -1;
    int j = final_j;
    while (i != start) {
      i = pred_[j];
      y_[j] = i;
      std::swap(j, x_[i]);
    }
  }

  // Moves every column with minimal d among cols_[lo..n) to the front.
  int collect_minimum(int lo) {
    int hi = lo + 1;
    double mind = d_[cols_[lo]];
    for (int k = hi; k < n_; ++k) {
      const int j = cols_[k];
      if (d_[j] <= mind + kEps) {
        if (d_[j] < mind - kEps) {
          hi = lo;
          mind = d_[j];
        }
        cols_[k] = cols_[hi];
        cols_[hi++] = j;
      }
    }
    return hi;
  }

  int scan(int& lo, int& hi) {
    while (lo != hi) {
      int j = cols_[lo++];
      const int i = y_[j];
      const double mind = d_[j];
      const double h = cost(i, j) - v_[j] - mind;
      for (int k = hi; k < n_; ++k) {
        j = cols_[k];
        const double red = cost(i, j) - v_[j] - h;
        if (red < d_[j]) {
          d_[j] = red;
          pred_[j] = i;
          if (red <= mind + kEps) {
            if (y_[j] < 0) return j;
            cols_[k] = cols_[hi];
            cols_[hi++] = j;
          }
        }
      }
    }
    return -1;
  }

  const double* c_;
  int n_;
  std::vector<int> x_, y_;
  std::vector<double> v_;
  std::vector<int> free_;
  std::vector<double> d_;
  std::vector<int> pred_, cols_;
};

// The same shortest augmenting paths on a candidate graph, with a binary heap
// in place of the dense minimum search. The diagonal is always a candidate so
// a perfect matching exists. After the sparse solve every row is checked
// against the full matrix; rows with a cheaper reduced cost outside their
// list get the offending columns added and are augmented again.
class CandidateAssignment {
 public:
  // `v0` are starting column potentials; candidates are the k smallest
  // c_ij - v0_j of each row.
  CandidateAssignment(const RowMatrix& c, int k, const Eigen::RowVectorXd& v0)
      : c_(c), n_(static_cast<int>(c.rows())), k_(std::min(k, n_)), adj_(n_), x_(n_, -1), y_(n_, -1),
        v_(v0.data(), v0.data() + v0.size()), d_(n_, 0.0), pred_(n_, -1), state_(n_, 0) {
    std::vector<std::pair<double, int>> idx;
    Eigen::RowVectorXd reduced(n_);
    for (int i = 0; i < n_; ++i) {
      reduced = c_.row(i) - v0;
      adj_[i] = smallest(reduced, k_, idx);
      if (std::find(adj_[i].begin(), adj_[i].end(), i) == adj_[i].end()) adj_[i].push_back(i);
    }
  }

  void solve() {
    std::vector<int> free_rows;
    for (int i = 0; i < n_; ++i) {
      const int j = best_candidate(i);
      if (y_[j] < 0) {
        x_[i] = j;
        y_[j] = i;
      } else {
        free_rows.push_back(i);
      }
    }
    for (;;) {
      for (int i : free_rows) augment(i);
      free_rows = repair();
      if (free_rows.empty()) break;
    }
  }

  const std::vector<int>& x() const { return x_; }
  const std::vector<double>& v() const { return v_; }

 private:
  int best_candidate(int i) const {
    int best = adj_[i].front();
    for (int j : adj_[i])
      if (c_(i, j) - v_[j] < c_(i, best) - v_[best]) best = j;
    return best;
  }

  void augment(int start) {
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    touched_.clear();
    scanned_.clear();
    auto relax = [&](int j, double dist, int row) {
      if (state_[j] == 0) {
        state_[j] = 1;
        touched_.push_back(j);
      } else if (state_[j] == 2 || dist >= d_[j]) {
        return;
      }
      d_[j] = dist;
      pred_[j] = row;
      heap.push({dist, j});
    };
    for (int j : adj_[start]) relax(j, c_(start, j) - v_[j], start);

    int final_j = -1;
    while (!heap.empty()) {
      const auto [dist, j] = heap.top();
      heap.pop();
      if (state_[j] == 2 || dist > d_[j]) continue;
      state_[j] = 2;
      if (y_[j] < 0) {
        final_j = j;
        break;
      }
      scanned_.push_back(j);
      const int i = y_[j];
      const double h = c_(i, j) - v_[j] - dist;
      for (int k : adj_[i])
        if (state_[k] != 2) relax(k, c_(i, k) - v_[k] - h, i);
    }
    for (int j : touched_) state_[j] = 0;
    if (final_j < 0) throw Error(ErrorCode::Domain, "candidate graph has no augmenting path");

    const double mind = d_[final_j];
    for (int j : scanned_) v_[j] += d_[j] - mind;
    int i = -1;
    int j = final_j;
    while (i != start) {
      i = pred_[j];
      y_[j] = i;
      std::swap(j, x_[i]);
    }
  }

  static std::vector<int> smallest(const Eigen::RowVectorXd& values, int m, std::vector<std::pair<double, int>>& buf) {
    buf.resize(static_cast<std::size_t>(values.size()));
    for (int j = 0; j < static_cast<int>(buf.size()); ++j) buf[j] = {values(j), j};
    std::nth_element(buf.begin(), buf.begin() + (m - 1), buf.end());
    std::vector<int> out(m);
    for (int t = 0; t < m; ++t) out[t] = buf[t].second;
    return out;
  }

  // Rows whose matched column is not a full-matrix minimum of c_ij - v_j get
  // their k cheapest reduced columns added and are freed.
  std::vector<int> repair() {
    std::vector<int> freed;
    const Eigen::Map<const Eigen::RowVectorXd> v(v_.data(), n_);
    Eigen::RowVectorXd reduced(n_);
    std::vector<std::pair<double, int>> idx;
    for (int i = 0; i < n_; ++i) {
      const double u = c_(i, x_[i]) - v_[x_[i]];
      reduced = c_.row(i) - v;
      if (reduced.minCoeff() >= u - kEps) continue;
      for (int j : smallest(reduced, k_, idx))
        if (reduced(j) < u - kEps && std::find(adj_[i].begin(), adj_[i].end(), j) == adj_[i].end())
          adj_[i].push_back(j);
      y_[x_[i]] = -1;
      x_[i] = -1;
      freed.push_back(i);
    }
    return freed;
  }

  const RowMatrix& c_;
  int n_;
  int k_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> x_, y_;
  std::vector<double> v_;
  std::vector<double> d_;
  std::vector<int> pred_;
  std::vector<char> state_;  // 0 unseen, 1 in heap, 2 settled
  std::vector<int> touched_, scanned_;
};

double assignment_cost(const CostMatrix& c, const std::vector<int>& ref_of_data) {
  double total = 0.0;
  for (int i = 0; i < c.size(); ++i) total += c(i, ref_of_data[i]);
  return total;
}

// Another optimal permutation exists iff the tight subgraph (zero reduced
// cost) contains an alternating cycle: a directed cycle on columns where an
// edge a -> b means the row holding a could take b instead.
bool has_tight_cycle(const CostMatrix& c, const std::vector<int>& x, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& v) {
  const int n = c.size();
  std::vector<std::vector<int>> adj(n);
  // costs are nonnegative, so the test is c - u - v <= tol * (1 + c)
  const double* vp = v.data();
  for (int i = 0; i < n; ++i) {
    const double* row = c.values().row(i).data();
    const double ui = u(i) + kTieTolerance;
    constexpr double keep = 1.0 - kTieTolerance;
    for (int j = 0; j < n; ++j)
      if (row[j] * keep - vp[j] <= ui && j != x[i]) adj[x[i]].push_back(j);
  }
  std::vector<char> color(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::pair<int, std::size_t>> stack;
  for (int s = 0; s < n; ++s) {
    if (color[s] || adj[s].empty()) continue;
    stack.push_back({s, 0});
    color[s] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < adj[node].size()) {
        const int w = adj[node][next++];
        if (color[w] == 1) return true;
        if (color[w] == 0) {
          color[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        color[node] = 2;
        stack.pop_back();
      }
    }
  }
  return false;
}

}  // namespace

CostMatrix::CostMatrix(RowMatrix values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols()) throw Error(ErrorCode::DimensionMismatch, "cost matrix must be square");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double c = values_.data()[i];
    if (!std::isfinite(c)) throw Error(ErrorCode::NonFiniteCost, "cost matrix has a non-finite entry");
    if (c < 0.0) throw Error(ErrorCode::Domain, "cost matrix has a negative entry");
  }
}

CostMatrix build_cost_matrix(const SymmetryGroup& group, const Eigen::MatrixXd& data,
                             const Eigen::MatrixXd& ref_points) {
  if (data.cols() != group.dim() || ref_points.cols() != group.dim())
    throw Error(ErrorCode::DimensionMismatch, "data and reference dimensions must match the group");
  const Eigen::Index n = data.rows();
  const Eigen::Index m = ref_points.rows();
  RowMatrix c(n, m);
  switch (group.kind()) {
    case GroupKind::Central: {
      const Eigen::VectorXd xx = data.rowwise().squaredNorm();
      const Eigen::VectorXd hh = ref_points.rowwise().squaredNorm();
      c.noalias() = data * ref_points.transpose();
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) c(i, j) = std::max(xx(i) + hh(j) - 2.0 * std::abs(c(i, j)), 0.0);
      break;
    }
    case GroupKind::SignChange: {
      const Eigen::MatrixXd ax = data.cwiseAbs();
      const Eigen::MatrixXd ah = ref_points.cwiseAbs();
      const Eigen::VectorXd xx = data.rowwise().squaredNorm();
      const Eigen::VectorXd hh = ref_points.rowwise().squaredNorm();
      c.noalias() = ax * ah.transpose();
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) c(i, j) = std::max(xx(i) + hh(j) - 2.0 * c(i, j), 0.0);
      break;
    }
    case GroupKind::Spherical: {
      const Eigen::VectorXd nx = data.rowwise().norm();
      const Eigen::VectorXd nh = ref_points.rowwise().norm();
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) c(i, j) = (nx(i) - nh(j)) * (nx(i) - nh(j));
      break;
    }
    case GroupKind::FiniteMatrices: {
      const Eigen::VectorXd xx = data.rowwise().squaredNorm();
      const Eigen::VectorXd hh = ref_points.rowwise().squaredNorm();
      // ||Q^T x - h||^2 = |x|^2 + |h|^2 - 2 x^T Q h; maximize the inner product
      RowMatrix best = RowMatrix::Constant(n, m, -std::numeric_limits<double>::infinity());
      for (const auto& q : group.elements()) best = best.cwiseMax(data * (q * ref_points.transpose()));
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) c(i, j) = xx(i) + hh(j) - 2.0 * best(i, j);
      break;
    }
  }
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    double& e = c.data()[k];
    if (!std::isfinite(e)) throw Error(ErrorCode::NonFiniteCost, "transport cost overflowed");
    if (e < 0.0) e = 0.0;  // rounding in the expanded square
  }
  return CostMatrix(std::move(c));
}

std::vector<int> Assignment::data_of_ref() const {
  std::vector<int> inv(ref_of_data.size());
  for (std::size_t i = 0; i < ref_of_data.size(); ++i) inv[ref_of_data[i]] = static_cast<int>(i);
  return inv;
}

namespace {

// Column potentials for a warm start: solve the problem on every 4th row and
// column, then extend its row duals to all columns by the c-transform
// v_j = min_s (c_sj - u_s). Small problems use the column minima.
Eigen::RowVectorXd coarse_potentials(const RowMatrix& c) {
  constexpr int kStride = 4;
  const Eigen::Index n = c.rows();
  if (n / kStride <= kDenseLapMax) return c.colwise().minCoeff();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; i += kStride) idx.push_back(i);
  const auto m = static_cast<Eigen::Index>(idx.size());
  RowMatrix sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = c(idx[a], idx[b]);
  const Assignment coarse = solve_lap(CostMatrix(std::move(sub)));
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Constant(n, kLarge);
  for (Eigen::Index a = 0; a < m; ++a)
    v = v.cwiseMin((c.row(idx[a]).array() - coarse.row_dual(a)).matrix());
  return v;
}

Assignment finish(const CostMatrix& costs, std::vector<int> x, const std::vector<double>& v) {
  const int n = costs.size();
  Assignment out;
  out.ref_of_data = std::move(x);
  out.col_dual = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
  out.row_dual.resize(n);
  for (int i = 0; i < n; ++i) out.row_dual(i) = costs(i, out.ref_of_data[i]) - out.col_dual(out.ref_of_data[i]);
  out.total_cost = assignment_cost(costs, out.ref_of_data);
  out.tie_flag = has_tight_cycle(costs, out.ref_of_data, out.row_dual, out.col_dual);
  return out;
}

}  // namespace

Assignment solve_lap_dense(const CostMatrix& costs) {
  const int n = costs.size();
  if (n == 0) return {};
  JonkerVolgenant jv(costs.values().data(), n);
  jv.solve();
  return finish(costs, jv.x(), jv.v());
}

Assignment solve_lap_sparse(const CostMatrix& costs, int candidates) {
  const int n = costs.size();
  if (n == 0) return {};
  if (candidates < 1) throw Error(ErrorCode::Domain, "candidate count must be positive");
  CandidateAssignment solver(costs.values(), candidates, coarse_potentials(costs.values()));
  solver.solve();
  return finish(costs, solver.x(), solver.v());
}

Assignment solve_lap(const CostMatrix& costs) {
  return costs.size() <= kDenseLapMax ? solve_lap_dense(costs) : solve_lap_sparse(costs);
}

bool verify_dual_certificate(const CostMatrix& costs, const Assignment& a, double tol) {
  const int n = costs.size();
  if (static_cast<int>(a.ref_of_data.size()) != n || a.row_dual.size() != n || a.col_dual.size() != n) return false;
  std::vector<char> used(n, 0);
  for (int i = 0; i < n; ++i) {
    const int j = a.ref_of_data[i];
    if (j < 0 || j >= n || used[j]) return false;
    used[j] = 1;
    if (std::abs(a.row_dual(i) + a.col_dual(j) - costs(i, j)) > tol) return false;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (a.row_dual(i) + a.col_dual(j) > costs(i, j) + tol) return false;
  return true;
}

Assignment solve_spherical(const Eigen::MatrixXd& data, const Eigen::MatrixXd& ref_points) {
  if (data.rows() != ref_points.rows() || data.cols() != ref_points.cols())
    throw Error(ErrorCode::DimensionMismatch, "data and reference must have the same shape");
  const Eigen::Index n = data.rows();
  const Eigen::VectorXd nx = data.rowwise().norm();
  const Eigen::VectorXd nh = ref_points.rowwise().norm();
  if (!nx.allFinite()) throw Error(ErrorCode::NonFiniteCost, "data norms must be finite");
  std::vector<int> dord(n), rord(n);
  std::iota(dord.begin(), dord.end(), 0);
  std::iota(rord.begin(), rord.end(), 0);
  std::sort(dord.begin(), dord.end(), [&](int a, int b) { return nx(a) < nx(b); });
  std::sort(rord.begin(), rord.end(), [&](int a, int b) { return nh(a) < nh(b); });

  Assignment out;
  out.ref_of_data.assign(n, -1);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k > 0 && costs_tied(nh(rord[k - 1]), nh(rord[k])))
      throw Error(ErrorCode::DuplicateNorms, "reference points " + std::to_string(rord[k - 1] + 1) + " and " +
                                                 std::to_string(rord[k] + 1) + " have equal norms");
    if (k > 0 && costs_tied(nx(dord[k - 1]), nx(dord[k]))) out.tie_flag = true;
    out.ref_of_data[dord[k]] = rord[k];
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = nx(i) - nh(out.ref_of_data[i]);
    out.total_cost += d * d;
  }
  return out;
}

BruteForceResult brute_force_lap(const CostMatrix& costs) {
  const int n = costs.size();
  if (n > kBruteForceMax)
    throw Error(ErrorCode::TooLarge, "brute-force assignment supports n <= " + std::to_string(kBruteForceMax));
  BruteForceResult out;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::pair<double, std::vector<int>>> all;
  double best = std::numeric_limits<double>::infinity();
  do {
    const double total = assignment_cost(costs, perm);
    all.push_back({total, perm});
    if (total < best) {
      best = total;
      out.best.ref_of_data = perm;
      out.best.total_cost = total;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& [total, p] : all)
    if (costs_tied(total, best)) out.minimizers.push_back(std::move(p));
  out.best.tie_flag = out.minimizers.size() > 1;
  return out;
}

}  // namespace otsym
