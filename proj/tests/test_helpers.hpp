// Shared fixtures and independent oracles used across the test suite.
#pragma once

#include <complex>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace testutil {

// Scratch directory under the system temp root, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    path_ = (base / ("beamloc_" + tag + "_" + std::to_string(std::random_device{}()))).string();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (std::filesystem::path(path_) / name).string();
  }

 private:
  std::string path_;
};

// Direct O(N^2) DFT, the reference the FFT-based paths are checked against.
inline std::vector<std::complex<double>> dft(const std::vector<double>& x, std::size_t n_out) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * t) / static_cast<double>(n));
    out[k] = acc;
  }
  return out;
}

// Projected-gradient solver for min 0.5||Aq - b||^2 s.t. q >= 0, run to
// convergence. Independent oracle for the deconvolution methods.
inline Eigen::VectorXd nnls_projected_gradient(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                               int max_iters = 200000, double tol = 1e-14) {
  const Eigen::MatrixXd AtA = A.transpose() * A;
  const Eigen::VectorXd Atb = A.transpose() * b;
  // power iteration for the operator norm
  Eigen::VectorXd v = Eigen::VectorXd::Ones(A.cols());
  double lip = 1.0;
  for (int i = 0; i < 200; ++i) {
    v = AtA * v;
    lip = v.norm();
    if (lip <= 0.0) break;
    v /= lip;
  }
  const double step = 1.0 / std::max(lip, 1e-300);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(A.cols());
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd grad = AtA * q - Atb;
    Eigen::VectorXd next = (q - step * grad).cwiseMax(0.0);
    const double delta = (next - q).norm();
    q = next;
    if (delta < tol) break;
  }
  return q;
}

}  // namespace testutil
