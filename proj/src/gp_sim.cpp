#include "gpfractal/gp_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <istream>
#include <ostream>
#include <random>

#include "gpfractal/errors.hpp"
#include "gpfractal/format.hpp"
#include "gpfractal/numerics.hpp"
#include "gpfractal/rng.hpp"

namespace gpfractal {

namespace {

void check_grid(std::span<const double> grid, double x_max) {
  if (grid.empty()) throw DomainError("grid is empty");
  if (grid.size() > CovMatrix::kMaxSize) throw DomainError("grid larger than " + std::to_string(CovMatrix::kMaxSize) + " points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw DomainError("grid must exclude t <= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("grid must be strictly increasing");
  }
  if (grid.back() > x_max * (1.0 + 1e-12)) throw DomainError("grid exceeds x_max = " + format_double(x_max));
}

// ∫₀^s k(v) k(Δ+v) dv with k = √((γ²)'), on geometric panels [s 2^-(j+1), s 2^-j], j < 40.
class VolterraIntegrator {
 public:
  VolterraIntegrator(const ScaleFunction& f, std::size_t q) : f_(f), rule_(numerics::gauss_legendre(q)) {}

  void set_row(double s) {
    s_ = s;
    nodes_.clear();
    weights_.clear();
    kv_.clear();
    for (int j = 0; j < kLevels; ++j) {
      const double hi = std::ldexp(s, -j);
      const double lo = 0.5 * hi;
      const double half = 0.5 * (hi - lo);
      const double mid = 0.5 * (hi + lo);
      for (std::size_t m = 0; m < rule_.nodes.size(); ++m) {
        const double v = mid + half * rule_.nodes[m];
        nodes_.push_back(v);
        weights_.push_back(half * rule_.weights[m]);
        kv_.push_back(k(v));
      }
    }
    eps_ = std::ldexp(s, -kLevels);
    gamma2_eps_ = f_.eval(eps_) * f_.eval(eps_);
    // ∫₀^ε k ≈ ε k(ε) / (Ψ(ε) + 1/2) for locally regularly varying k.
    int_k_eps_ = eps_ * k(eps_) / (f_.psi(eps_) + 0.5);
  }

  double entry(double delta) const {
    double sum = 0.0;
    if (delta == 0.0) {
      for (std::size_t m = 0; m < nodes_.size(); ++m) sum += weights_[m] * kv_[m] * kv_[m];
      return sum + gamma2_eps_;
    }
    for (std::size_t m = 0; m < nodes_.size(); ++m) sum += weights_[m] * kv_[m] * k(delta + nodes_[m]);
    return sum + k(delta) * int_k_eps_;
  }

 private:
  static constexpr int kLevels = 40;
  double k(double v) const { return std::sqrt(f_.variance_derivative(std::min(v, f_.x_max()))); }

  const ScaleFunction& f_;
  const numerics::GaussRule& rule_;
  double s_ = 0.0;
  std::vector<double> nodes_, weights_, kv_;
  double eps_ = 0.0, gamma2_eps_ = 0.0, int_k_eps_ = 0.0;
};

template <class T>
void put(std::ostream& out, T v) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.write(buf, 8);
}

template <class T>
T get(std::istream& in) {
  char buf[8];
  if (!in.read(buf, 8)) throw ValidationError("paths", "truncated binary file");
  std::uint64_t bits;
  std::memcpy(&bits, buf, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T v;
  std::memcpy(&v, &bits, 8);
  return v;
}

constexpr char kMagic[8] = {'G', 'P', 'F', 'P', 'A', 'T', 'H', 'S'};

}  // namespace

CovMatrix::CovMatrix(std::vector<double> grid, Eigen::MatrixXd R) : grid_(std::move(grid)), R_(std::move(R)) {
  if (R_.rows() != static_cast<Eigen::Index>(grid_.size()) || R_.cols() != R_.rows()) {
    throw DomainError("CovMatrix: matrix shape does not match grid");
  }
  for (Eigen::Index i = 0; i < R_.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (R_(i, j) != R_(j, i)) throw DomainError("CovMatrix: matrix is not symmetric");
    }
  }
}

std::size_t CovMatrix::index_of(double t) const {
  auto it = std::lower_bound(grid_.begin(), grid_.end(), t * (1.0 - 1e-12));
  if (it == grid_.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, std::abs(t))) {
    throw DomainError("time " + format_double(t) + " is not a grid point");
  }
  return static_cast<std::size_t>(it - grid_.begin());
}

void CovMatrix::factorize() {
  const Eigen::Index n = R_.rows();
  const double mean_diag = R_.diagonal().mean();
  for (int k = -1; k <= 5; ++k) {
    const double jitter = k < 0 ? 0.0 : 1e-14 * mean_diag * std::pow(10.0, k);
    Eigen::MatrixXd A = R_;
    A.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd L = llt.matrixL();
    if (!L.diagonal().allFinite() || (L.diagonal().array() <= 0.0).any()) continue;
    L_ = std::move(L);
    jitter_ = jitter;
    return;
  }
  throw NumericalError("covariance is not positive definite on this grid (n = " + std::to_string(n) +
                       ", jitter up to 1e-9 * mean diag); reject this family/grid combination");
}

const Eigen::MatrixXd& CovMatrix::cholesky() const {
  if (!factorized()) throw NumericalError("CovMatrix: not factorized");
  return L_;
}

double CovMatrix::cholesky_residual() const {
  const Eigen::MatrixXd& L = cholesky();
  const Eigen::MatrixXd back = L * L.transpose();
  return (back - R_).cwiseAbs().maxCoeff() / R_.cwiseAbs().maxCoeff();
}

CovMatrix cov_stationary_increments(const ScaleFunction& f, std::span<const double> grid) {
  check_grid(grid, f.x_max());
  const std::size_t n = grid.size();
  std::vector<double> g2(n);
  for (std::size_t i = 0; i < n; ++i) g2[i] = f.eval(grid[i]) * f.eval(grid[i]);
  Eigen::MatrixXd R(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    R(i, i) = g2[i];
    for (std::size_t j = 0; j < i; ++j) {
      const double gd = f.eval(grid[i] - grid[j]);
      R(i, j) = R(j, i) = 0.5 * (g2[i] + g2[j] - gd * gd);
    }
  }
  CovMatrix cov(std::vector<double>(grid.begin(), grid.end()), std::move(R));
  cov.factorize();
  return cov;
}

CovMatrix cov_volterra(const ScaleFunction& f, std::span<const double> grid, std::size_t n_quad) {
  if (n_quad < 64) throw DomainError("cov_volterra: n_quad must be >= 64");
  check_grid(grid, f.x_max());
  const std::size_t n = grid.size();
  const std::size_t q = n_quad / 4;
  VolterraIntegrator coarse(f, q);
  VolterraIntegrator fine(f, 2 * q);
  Eigen::MatrixXd R(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    coarse.set_row(grid[i]);
    fine.set_row(grid[i]);
    for (std::size_t j = i; j < n; ++j) {
      const double delta = j == i ? 0.0 : grid[j] - grid[i];
      const double a = coarse.entry(delta);
      const double b = fine.entry(delta);
      const double rel = std::abs(b - a) / std::max(std::abs(b), 1e-300);
      if (rel > 1e-6) {
        throw NumericalError("cov_volterra: quadrature not converged at (s, t) = (" + format_double(grid[i]) + ", " +
                             format_double(grid[j]) + "), relative change " + format_double(rel) +
                             " after doubling n_quad = " + std::to_string(n_quad));
      }
      R(i, j) = R(j, i) = b;
    }
  }
  CovMatrix cov(std::vector<double>(grid.begin(), grid.end()), std::move(R));
  cov.factorize();
  return cov;
}

double conditional_variance(const CovMatrix& cov, double s, double t) {
  const std::size_t i = cov.index_of(s);
  const std::size_t j = cov.index_of(t);
  const double rss = cov(i, i);
  if (rss < 1e-14) throw DomainError("conditional_variance: R(s,s) < 1e-14");
  if (i == j) return 0.0;
  return std::max(0.0, cov(j, j) - cov(i, j) * cov(i, j) / rss);
}

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
  if (n < 2 || !(b > a)) throw DomainError("uniform_grid: need b > a and n >= 2");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = b;
  return g;
}

PathSampler::PathSampler(const CovMatrix& cov, std::size_t d, std::uint64_t seed) : cov_(cov), d_(d), seed_(seed) {
  if (d == 0) throw DomainError("d must be positive");
  cov_.cholesky();
}

std::size_t PathSampler::sample_block(std::size_t block, std::size_t n_paths, std::vector<double>& out) const {
  const std::size_t n = cov_.size();
  const std::size_t first = block * kBlockPaths;
  if (first >= n_paths) return 0;
  const std::size_t count = std::min(kBlockPaths, n_paths - first);
  // Always a full-width block so the product runs the same arithmetic for every block.
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, kBlockPaths * d_);
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t c = 0; c < d_; ++c) {
      auto eng = substream(seed_, first + p, c);
      std::normal_distribution<double> normal;
      for (std::size_t i = 0; i < n; ++i) Z(i, p * d_ + c) = normal(eng);
    }
  }
  const Eigen::MatrixXd X = cov_.cholesky().triangularView<Eigen::Lower>() * Z;
  out.resize(count * n * d_);
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d_; ++c) out[(p * n + i) * d_ + c] = X(i, p * d_ + c);
    }
  }
  return count;
}

void PathSampler::for_each_block(std::size_t n_paths,
                                 const std::function<void(std::size_t, std::size_t, std::span<const double>)>& fn) const {
  const long n_blocks = static_cast<long>((n_paths + kBlockPaths - 1) / kBlockPaths);
  std::exception_ptr error;
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(dynamic)
    for (long b = 0; b < n_blocks; ++b) {
      try {
        const std::size_t count = sample_block(static_cast<std::size_t>(b), n_paths, buf);
        fn(static_cast<std::size_t>(b) * kBlockPaths, count, buf);
      } catch (...) {
#pragma omp critical(gpf_block_error)
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

PathBatch sample_paths(const CovMatrix& cov, std::size_t d, std::size_t n_paths, std::uint64_t seed) {
  if (n_paths == 0) throw DomainError("n_paths must be positive");
  PathSampler sampler(cov, d, seed);
  PathBatch batch;
  batch.grid = cov.grid();
  batch.d = d;
  batch.n_paths = n_paths;
  batch.seed = seed;
  batch.values.resize(n_paths * cov.size() * d);
  const std::size_t stride = cov.size() * d;
  sampler.for_each_block(n_paths, [&](std::size_t first, std::size_t count, std::span<const double> v) {
    std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(count * stride), batch.values.begin() + static_cast<std::ptrdiff_t>(first * stride));
  });
  return batch;
}

void write_paths_binary(const PathBatch& batch, std::ostream& out) {
  out.write(kMagic, 8);
  put<std::uint64_t>(out, batch.grid.size());
  put<std::uint64_t>(out, batch.d);
  put<std::uint64_t>(out, batch.n_paths);
  put<std::uint64_t>(out, batch.seed);
  for (double t : batch.grid) put(out, t);
  for (double v : batch.values) put(out, v);
}

PathBatch read_paths_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ValidationError("paths", "bad magic");
  PathBatch b;
  const auto n = get<std::uint64_t>(in);
  b.d = get<std::uint64_t>(in);
  b.n_paths = get<std::uint64_t>(in);
  b.seed = get<std::uint64_t>(in);
  if (n > CovMatrix::kMaxSize || b.d > 64 || b.n_paths > (1ULL << 32)) throw ValidationError("paths", "implausible header");
  b.grid.resize(n);
  for (auto& t : b.grid) t = get<double>(in);
  b.values.resize(n * b.d * b.n_paths);
  for (auto& v : b.values) v = get<double>(in);
  return b;
}

void write_paths_csv(const PathBatch& batch, std::ostream& out) {
  out << "path,component,t,value\n";
  for (std::size_t p = 0; p < batch.n_paths; ++p) {
    for (std::size_t c = 0; c < batch.d; ++c) {
      for (std::size_t i = 0; i < batch.grid.size(); ++i) {
        out << p << ',' << c << ',' << format_double(batch.grid[i]) << ',' << format_double(batch.at(p, i, c)) << '\n';
      }
    }
  }
}

}  // namespace gpfractal
