#include "ckdprog/explain/kernel_shap.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"

namespace ckdprog {
namespace {

struct Coalition {
  std::vector<std::uint8_t> in;  // 0/1 per feature
  double weight = 0.0;
};

double log_binom(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

double shapley_kernel(int n, int s) {
  // (n-1) / (C(n,s) * s * (n-s))
  return (n - 1.0) * std::exp(-log_binom(n, s)) / (static_cast<double>(s) * (n - s));
}

// All size-s subsets of {0..n-1} in lexicographic order.
void enumerate_size(int n, int s, double weight, std::vector<Coalition>& out) {
  std::vector<int> picks(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) picks[static_cast<std::size_t>(i)] = i;
  while (true) {
    Coalition c;
    c.in.assign(static_cast<std::size_t>(n), 0);
    for (const int p : picks) c.in[static_cast<std::size_t>(p)] = 1;
    c.weight = weight;
    out.push_back(std::move(c));

    int i = s - 1;
    while (i >= 0 && picks[static_cast<std::size_t>(i)] == n - s + i) --i;
    if (i < 0) break;
    ++picks[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < s; ++j)
      picks[static_cast<std::size_t>(j)] = picks[static_cast<std::size_t>(j - 1)] + 1;
  }
}

std::vector<Coalition> draw_coalitions(int n, int n_coalitions, std::uint64_t seed) {
  std::vector<Coalition> coalitions;
  std::vector<bool> complete(static_cast<std::size_t>(n), false);  // by size, 1..n-1
  long long remaining = n_coalitions;

  // Paired sizes from the outside in; small and complement sizes carry the
  // largest kernel weight, so they are enumerated first.
  for (int s = 1; s <= (n - 1) / 2 + ((n - 1) % 2); ++s) {
    const int t = n - s;
    std::vector<int> sizes{s};
    if (t != s && t <= n - 1) sizes.push_back(t);
    double group_count = 0.0;
    for (const int size : sizes) group_count += std::exp(log_binom(n, size));
    if (group_count > static_cast<double>(remaining)) break;
    for (const int size : sizes) {
      enumerate_size(n, size, shapley_kernel(n, size), coalitions);
      complete[static_cast<std::size_t>(size)] = true;
    }
    remaining -= static_cast<long long>(group_count);
  }

  // Sample the incomplete sizes in proportion to their total kernel mass;
  // each sampled coalition receives an equal share of that mass.
  std::vector<int> open_sizes;
  std::vector<double> mass;
  double total_mass = 0.0;
  for (int s = 1; s <= n - 1; ++s) {
    if (complete[static_cast<std::size_t>(s)]) continue;
    open_sizes.push_back(s);
    const double m = shapley_kernel(n, s) * std::exp(log_binom(n, s));
    mass.push_back(m);
    total_mass += m;
  }
  if (!open_sizes.empty() && remaining > 0) {
    Rng rng(seed);
    const std::size_t first_sampled = coalitions.size();
    for (long long draw = 0; draw < remaining; ++draw) {
      double u = rng.uniform() * total_mass;
      std::size_t pick = 0;
      while (pick + 1 < open_sizes.size() && u > mass[pick]) {
        u -= mass[pick];
        ++pick;
      }
      const int s = open_sizes[pick];
      Coalition c;
      c.in.assign(static_cast<std::size_t>(n), 0);
      for (const int f : rng.sample_without_replacement(n, s))
        c.in[static_cast<std::size_t>(f)] = 1;
      coalitions.push_back(std::move(c));
    }
    const double share = total_mass / static_cast<double>(coalitions.size() - first_sampled);
    for (std::size_t i = first_sampled; i < coalitions.size(); ++i) coalitions[i].weight = share;
  }
  return coalitions;
}

}  // namespace

Eigen::VectorXd kernel_shap(const BatchModelFn& model_fn, const Eigen::RowVectorXd& x,
                            const Background& background, int n_coalitions, std::uint64_t seed) {
  background.validate();
  const int n = static_cast<int>(x.size());
  if (n < 1) throw ValidationError("need at least one feature");
  if (background.rows.cols() != n)
    throw ValidationError("background column count does not match the input");
  if (n_coalitions < n + 2)
    throw ValidationError("n_coalitions must be at least N + 2 = " + std::to_string(n + 2));

  const Eigen::Index k = background.rows.rows();
  const double base = model_fn(background.rows).mean();
  Eigen::MatrixXd x_row(1, n);
  x_row.row(0) = x;
  const double fx = model_fn(x_row)[0];

  if (n == 1) {
    Eigen::VectorXd phi(1);
    phi[0] = fx - base;
    return phi;
  }

  const std::vector<Coalition> coalitions = draw_coalitions(n, n_coalitions, seed);

  // One composite row per (coalition, background row); a single batched call
  // keeps model evaluation vectorized.
  const Eigen::Index n_rows = static_cast<Eigen::Index>(coalitions.size()) * k;
  Eigen::MatrixXd composites(n_rows, n);
  Eigen::Index at = 0;
  for (const Coalition& c : coalitions) {
    for (Eigen::Index r = 0; r < k; ++r) {
      for (int j = 0; j < n; ++j)
        composites(at, j) = c.in[static_cast<std::size_t>(j)] ? x[j] : background.rows(r, j);
      ++at;
    }
  }
  const Eigen::VectorXd outputs = model_fn(composites);

  // Eliminate the last feature through the efficiency constraint, then solve
  // the weighted normal equations in the remaining n-1 unknowns.
  const int m = n - 1;
  Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd atb = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd a(m);
  for (std::size_t c = 0; c < coalitions.size(); ++c) {
    const Coalition& coalition = coalitions[c];
    double nu = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) nu += outputs[static_cast<Eigen::Index>(c) * k + r];
    nu /= static_cast<double>(k);

    const double last = coalition.in[static_cast<std::size_t>(m)] ? 1.0 : 0.0;
    for (int j = 0; j < m; ++j)
      a[j] = (coalition.in[static_cast<std::size_t>(j)] ? 1.0 : 0.0) - last;
    const double target = nu - base - last * (fx - base);
    ata.noalias() += coalition.weight * (a * a.transpose());
    atb.noalias() += coalition.weight * target * a;
  }

  // Min-norm least squares: identical to the exact solve when the sampled
  // design has full rank, and still defined when a small budget leaves the
  // normal equations rank deficient.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ata);
  const Eigen::VectorXd psi = cod.solve(atb);

  Eigen::VectorXd phi(n);
  phi.head(m) = psi;
  phi[m] = (fx - base) - psi.sum();
  return phi;
}

Eigen::VectorXd kernel_shap(const ModelFn& model_fn, const Eigen::RowVectorXd& x,
                            const Background& background, int n_coalitions, std::uint64_t seed) {
  BatchModelFn batched = [&](const Eigen::MatrixXd& rows) {
    Eigen::VectorXd out(rows.rows());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out[i] = model_fn(rows.row(i));
    return out;
  };
  return kernel_shap(batched, x, background, n_coalitions, seed);
}

}  // namespace ckdprog
