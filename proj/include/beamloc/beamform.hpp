// Frequency-domain beamforming baselines: cross-spectral matrix, steering
// vectors, DAS, the PSF system matrix, and the DAMAS / CLEAN-PSF / CLEAN-SC /
// FFT-FISTA deconvolutions, plus peak extraction.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "beamloc/common.hpp"
#include "beamloc/fft.hpp"
#include "beamloc/geometry.hpp"
#include "beamloc/simulate.hpp"
#include "beamloc/spectra.hpp"

namespace beamloc {

// Welch-averaged cross-spectral matrices on the retained band.
struct CrossSpectralMatrix {
  std::vector<double> freqs_hz;
  std::vector<Eigen::MatrixXcd> mats;  // one n_mics x n_mics Hermitian matrix per bin
  int n_snapshots = 0;

  std::size_t n_bins() const { return freqs_hz.size(); }
  std::size_t n_mics() const { return mats.empty() ? 0 : static_cast<std::size_t>(mats[0].rows()); }
};

// DFT bin indices of block_len-point blocks at the given rate whose center
// frequency falls inside [f_min_hz, f_max_hz], both ends inclusive.
inline std::vector<std::size_t> band_bins(double sample_rate, int block_len,
                                          double f_min_hz, double f_max_hz) {
  if (block_len <= 1) throw InvalidArgument("csm block length must exceed one sample");
  const double bin_hz = sample_rate / block_len;
  std::vector<std::size_t> bins;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(block_len) / 2; ++k) {
    const double f = bin_hz * static_cast<double>(k);
    if (f >= f_min_hz && f <= f_max_hz) bins.push_back(k);
  }
  if (bins.empty()) throw InvalidArgument("csm band contains no frequency bins");
  return bins;
}

inline std::vector<double> band_bin_freqs(double sample_rate, int block_len,
                                          double f_min_hz, double f_max_hz) {
  const auto bins = band_bins(sample_rate, block_len, f_min_hz, f_max_hz);
  std::vector<double> freqs(bins.size());
  const double bin_hz = sample_rate / block_len;
  for (std::size_t i = 0; i < bins.size(); ++i) freqs[i] = bin_hz * static_cast<double>(bins[i]);
  return freqs;
}

// Hann-windowed, 50%-overlap Welch estimate. Normalized by snapshots and
// window energy so the diagonal estimates per-channel squared RMS at each
// bin, matching the broadband white-noise convention the steering
// normalization assumes.
inline CrossSpectralMatrix csm(const MultichannelSignal& sig, int block_len,
                               double f_min_hz, double f_max_hz,
                               bool diag_removal = false) {
  if (sig.n_samples < static_cast<std::size_t>(std::max(block_len, 2)))
    throw InvalidArgument("signal shorter than the csm block length");
  const double bin_hz = sig.sample_rate / block_len;
  const auto bins = band_bins(sig.sample_rate, block_len, f_min_hz, f_max_hz);

  const auto window = make_window(WindowKind::kHann, static_cast<std::size_t>(block_len));
  const double win_energy = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);
  const std::size_t hop = static_cast<std::size_t>(block_len) / 2;

  CrossSpectralMatrix out;
  out.freqs_hz.reserve(bins.size());
  for (auto k : bins) out.freqs_hz.push_back(bin_hz * static_cast<double>(k));
  out.mats.assign(bins.size(), Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(sig.n_mics),
                                                      static_cast<Eigen::Index>(sig.n_mics)));

  const auto n_mics = static_cast<Eigen::Index>(sig.n_mics);
  Eigen::MatrixXcd block_spec(n_mics, static_cast<Eigen::Index>(bins.size()));
  std::vector<double> buf(static_cast<std::size_t>(block_len));
  int snapshots = 0;
  for (std::size_t start = 0; start + static_cast<std::size_t>(block_len) <= sig.n_samples; start += hop) {
    for (std::size_t m = 0; m < sig.n_mics; ++m) {
      const float* ch = sig.channel(m);
      for (int n = 0; n < block_len; ++n)
        buf[static_cast<std::size_t>(n)] = ch[start + static_cast<std::size_t>(n)] * window[static_cast<std::size_t>(n)];
      const auto spec = fft::real_forward_half(buf);
      for (std::size_t b = 0; b < bins.size(); ++b)
        block_spec(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(b)) = spec[bins[b]];
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const auto col = block_spec.col(static_cast<Eigen::Index>(b));
      out.mats[b].noalias() += col * col.adjoint();
    }
    ++snapshots;
  }
  out.n_snapshots = snapshots;
  const double scale = 1.0 / (static_cast<double>(snapshots) * win_energy);
  for (auto& m : out.mats) {
    m *= scale;
    if (diag_removal) m.diagonal().setZero();
  }
  return out;
}

// Steering vectors for one frequency, one row per grid point. The rows are
// scaled so that DAS applied to a noiseless point source at a node returns
// its squared RMS referenced to 1 m: w_m(g) = e^{-j w r_m / c} / (r_m * s(g))
// with s(g) = sum_l 1/r_l(g)^2, making w(g)^H a(g) = 1 for the unit-source
// manifold a_m(g) = e^{-j w r_m / c} / r_m.
struct SteeringSet {
  std::vector<double> freqs_hz;
  std::vector<Eigen::MatrixXcd> w;       // per bin: n_grid x n_mics
  std::vector<double> manifold_scale;    // s(g); a(g) = w(g) * s(g)
  ScanGrid grid;

  std::size_t n_grid() const { return manifold_scale.size(); }
};

inline Eigen::MatrixXcd steering(const MicArrayGeometry& geom, const ScanGrid& grid,
                                 double freq_hz, double speed_of_sound = kSpeedOfSound) {
  if (freq_hz <= 0.0) throw InvalidArgument("steering frequency must be positive");
  grid.validate();
  const std::size_t n_grid = grid.size();
  const std::size_t n_mics = geom.count();
  Eigen::MatrixXcd w(static_cast<Eigen::Index>(n_grid), static_cast<Eigen::Index>(n_mics));
  const double omega = 2.0 * M_PI * freq_hz / speed_of_sound;
  for (std::size_t g = 0; g < n_grid; ++g) {
    const Vec3 node{grid.node_x_of(g), grid.node_y_of(g), grid.z_plane};
    double s = 0.0;
    std::vector<double> r(n_mics);
    for (std::size_t m = 0; m < n_mics; ++m) {
      r[m] = distance(node, geom.positions[m]);
      if (r[m] < 1e-9) throw DegenerateGeometry("grid node coincides with a microphone");
      s += 1.0 / (r[m] * r[m]);
    }
    for (std::size_t m = 0; m < n_mics; ++m)
      w(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(m)) =
          std::polar(1.0 / (r[m] * s), -omega * r[m]);
  }
  return w;
}

inline SteeringSet steering_set(const MicArrayGeometry& geom, const ScanGrid& grid,
                                const std::vector<double>& freqs_hz,
                                double speed_of_sound = kSpeedOfSound) {
  SteeringSet set;
  set.grid = grid;
  set.freqs_hz = freqs_hz;
  set.w.reserve(freqs_hz.size());
  for (double f : freqs_hz) set.w.push_back(steering(geom, grid, f, speed_of_sound));

  const std::size_t n_grid = grid.size();
  set.manifold_scale.resize(n_grid);
  for (std::size_t g = 0; g < n_grid; ++g) {
    const Vec3 node{grid.node_x_of(g), grid.node_y_of(g), grid.z_plane};
    double s = 0.0;
    for (const auto& mic : geom.positions) {
      const double r = distance(node, mic);
      s += 1.0 / (r * r);
    }
    set.manifold_scale[g] = s;
  }
  return set;
}

// Squared-pressure map over the scan grid (row-major, iy * nx + ix).
struct BeamMap {
  ScanGrid grid;
  std::vector<double> values;
  double f_min_hz = 0.0, f_max_hz = 0.0;
  std::string method;

  double max_value() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  }
};

namespace detail {

inline void check_bins_match(const CrossSpectralMatrix& c, const SteeringSet& s) {
  if (c.n_bins() != s.freqs_hz.size())
    throw InvalidArgument("csm and steering set have different bin counts");
  for (std::size_t b = 0; b < c.n_bins(); ++b)
    if (std::abs(c.freqs_hz[b] - s.freqs_hz[b]) > 1e-6)
      throw InvalidArgument("csm and steering set frequencies disagree");
}

}  // namespace detail

// Band-averaged w^H C w per grid point; negatives (possible only through
// numerical noise or diagonal removal) are clipped to zero.
inline BeamMap das(const CrossSpectralMatrix& c, const SteeringSet& steer) {
  detail::check_bins_match(c, steer);
  BeamMap map;
  map.grid = steer.grid;
  map.method = "das";
  map.f_min_hz = c.freqs_hz.front();
  map.f_max_hz = c.freqs_hz.back();
  const std::size_t n_grid = steer.n_grid();
  map.values.assign(n_grid, 0.0);
  for (std::size_t b = 0; b < c.n_bins(); ++b) {
    // value(g) = w_g^H C w_g = rowwise dot of W* with (C W^T)^T rows
    const Eigen::MatrixXcd cw = steer.w[b].conjugate() * c.mats[b];  // n_grid x n_mics
    for (std::size_t g = 0; g < n_grid; ++g) {
      const auto gi = static_cast<Eigen::Index>(g);
      map.values[g] += (cw.row(gi) * steer.w[b].row(gi).transpose()).value().real();
    }
  }
  const double inv = 1.0 / static_cast<double>(c.n_bins());
  for (auto& v : map.values) v = std::max(0.0, v * inv);
  return map;
}

// DAMAS system matrix: A[g, g0] = band-mean |w(g)^H a(g0)|^2, unit diagonal.
inline Eigen::MatrixXd psf_matrix(const SteeringSet& steer) {
  const std::size_t n_grid = steer.n_grid();
  const auto n = static_cast<Eigen::Index>(n_grid);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t b = 0; b < steer.freqs_hz.size(); ++b) {
    const Eigen::MatrixXcd inner = steer.w[b].conjugate() * steer.w[b].transpose();
    acc += inner.cwiseAbs2();
  }
  acc /= static_cast<double>(steer.freqs_hz.size());
  for (Eigen::Index g0 = 0; g0 < n; ++g0) {
    const double s = steer.manifold_scale[static_cast<std::size_t>(g0)];
    acc.col(g0) *= s * s;
  }
  return acc;
}

// Gauss-Seidel DAMAS with nonnegativity clipping; sweep order alternates
// ascending/descending per iteration.
inline BeamMap damas(const BeamMap& dirty, const Eigen::MatrixXd& A, int iters) {
  if (iters <= 0) throw InvalidArgument("damas needs a positive iteration count");
  const auto n = static_cast<Eigen::Index>(dirty.values.size());
  if (A.rows() != n || A.cols() != n)
    throw InvalidArgument("psf matrix does not match the beam map grid");
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  Eigen::Map<const Eigen::VectorXd> b(dirty.values.data(), n);
  for (int it = 0; it < iters; ++it) {
    if (it % 2 == 0) {
      for (Eigen::Index g = 0; g < n; ++g) {
        const double r = b(g) - A.row(g).dot(q) + A(g, g) * q(g);
        q(g) = std::max(0.0, r / A(g, g));
      }
    } else {
      for (Eigen::Index g = n - 1; g >= 0; --g) {
        const double r = b(g) - A.row(g).dot(q) + A(g, g) * q(g);
        q(g) = std::max(0.0, r / A(g, g));
      }
    }
  }
  BeamMap out = dirty;
  out.method = "damas";
  for (Eigen::Index g = 0; g < n; ++g) out.values[static_cast<std::size_t>(g)] = q(g);
  return out;
}

struct CleanResult {
  BeamMap clean;
  BeamMap residual;
  int iterations = 0;
};

// Hogbom-style loop on the dirty map: subtract gain * peak * A[:, g*] and
// accumulate gain * peak at g*. Stops at max_iters, when the residual peak
// stops decreasing, or when it falls below stop_frac * initial peak.
inline CleanResult clean_psf(const BeamMap& dirty, const Eigen::MatrixXd& A, double gain,
                             int max_iters, double stop_frac = 1e-6) {
  if (gain <= 0.0 || gain > 1.0) throw InvalidArgument("clean gain must be in (0, 1]");
  const auto n = static_cast<Eigen::Index>(dirty.values.size());
  if (A.rows() != n || A.cols() != n)
    throw InvalidArgument("psf matrix does not match the beam map grid");
  CleanResult res{dirty, dirty, 0};
  res.clean.method = "clean-psf";
  std::fill(res.clean.values.begin(), res.clean.values.end(), 0.0);
  Eigen::Map<Eigen::VectorXd> r(res.residual.values.data(), n);

  double prev_peak = std::numeric_limits<double>::infinity();
  const double initial_peak = res.residual.max_value();
  const double threshold = stop_frac * initial_peak;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::Index gmax = 0;
    const double peak = r.maxCoeff(&gmax);
    if (peak <= threshold || peak >= prev_peak) break;
    prev_peak = peak;
    res.clean.values[static_cast<std::size_t>(gmax)] += gain * peak;
    r -= gain * peak * A.col(gmax);
    ++res.iterations;
  }
  return res;
}

// CLEAN-SC: per iteration locates the DAS peak, then per bin removes the
// source-coherent CSM component h = C w / p and accumulates gain * peak at
// the located node. The dirty map is updated incrementally. When requested,
// reports the remaining degraded-CSM trace as a fraction of the original.
inline BeamMap clean_sc(const CrossSpectralMatrix& c, const SteeringSet& steer, double gain,
                        int max_iters, double stop_frac = 1e-6,
                        double* residual_trace_fraction = nullptr) {
  if (gain <= 0.0 || gain > 1.0) throw InvalidArgument("clean gain must be in (0, 1]");
  detail::check_bins_match(c, steer);
  const std::size_t n_bins = c.n_bins();
  const std::size_t n_grid = steer.n_grid();

  std::vector<Eigen::MatrixXcd> degraded = c.mats;
  BeamMap dirty = das(c, steer);

  BeamMap out;
  out.grid = steer.grid;
  out.method = "clean-sc";
  out.f_min_hz = dirty.f_min_hz;
  out.f_max_hz = dirty.f_max_hz;
  out.values.assign(n_grid, 0.0);

  double prev_peak = std::numeric_limits<double>::infinity();
  const double initial_peak = dirty.max_value();
  const double threshold = stop_frac * initial_peak;

  for (int it = 0; it < max_iters; ++it) {
    std::size_t gmax = 0;
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < n_grid; ++g)
      if (dirty.values[g] > peak) {
        peak = dirty.values[g];
        gmax = g;
      }
    if (peak <= threshold || peak >= prev_peak) break;
    prev_peak = peak;
    out.values[gmax] += gain * peak;

    for (std::size_t b = 0; b < n_bins; ++b) {
      const auto gi = static_cast<Eigen::Index>(gmax);
      const Eigen::VectorXcd wg = steer.w[b].row(gi).transpose();
      const Eigen::VectorXcd cw = degraded[b] * wg;
      const double p_bin = (wg.adjoint() * cw).value().real();  // w^H C w
      if (p_bin <= 0.0) continue;
      const Eigen::VectorXcd h = cw / p_bin;  // source-coherent component, w^H h = 1
      degraded[b].noalias() -= gain * p_bin * (h * h.adjoint());
      // incremental dirty-map update: d(g) -= gain * p_bin * |w_g^H h|^2 / n_bins
      const Eigen::VectorXcd wh = steer.w[b].conjugate() * h;
      for (std::size_t g = 0; g < n_grid; ++g)
        dirty.values[g] -= gain * p_bin * std::norm(wh(static_cast<Eigen::Index>(g))) /
                           static_cast<double>(n_bins);
    }
  }
  if (residual_trace_fraction) {
    double orig = 0.0, left = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      orig += c.mats[b].trace().real();
      left += degraded[b].trace().real();
    }
    *residual_trace_fraction = orig > 0.0 ? left / orig : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// FFT-FISTA deconvolution with a shift-invariant PSF kernel.
// ---------------------------------------------------------------------------

// Center-grid PSF column reshaped onto the grid; the shift-invariant kernel
// the FFT solver assumes.
inline std::vector<double> psf_center_kernel(const Eigen::MatrixXd& A, const ScanGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (A.rows() != n || A.cols() != n)
    throw InvalidArgument("psf matrix does not match the grid");
  const std::size_t center = grid.index(grid.nx / 2, grid.ny / 2);
  std::vector<double> kernel(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g)
    kernel[g] = A(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(center));
  return kernel;
}

namespace detail {

// 2D FFT helpers over row-major (rows x cols) complex arrays.
inline void fft2_inplace(std::vector<std::complex<double>>& a, std::size_t rows, std::size_t cols,
                         bool inverse) {
  Eigen::FFT<double> f;
  std::vector<std::complex<double>> line, spec;
  line.resize(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(a.begin() + static_cast<std::ptrdiff_t>(r * cols),
              a.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols), line.begin());
    if (inverse) f.inv(spec, line); else f.fwd(spec, line);
    std::copy(spec.begin(), spec.end(), a.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  line.resize(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) line[r] = a[r * cols + c];
    if (inverse) f.inv(spec, line); else f.fwd(spec, line);
    for (std::size_t r = 0; r < rows; ++r) a[r * cols + c] = spec[r];
  }
}

// Circular convolution machinery on a 2x zero-padded grid.
struct FistaOperator {
  std::size_t ny, nx, py, px;
  std::vector<std::complex<double>> kernel_hat;
  double lipschitz = 0.0;

  FistaOperator(const std::vector<double>& kernel, const ScanGrid& grid)
      : ny(static_cast<std::size_t>(grid.ny)), nx(static_cast<std::size_t>(grid.nx)),
        py(2 * ny), px(2 * nx) {
    if (kernel.size() != grid.size())
      throw InvalidArgument("psf kernel does not match the grid");
    const std::size_t cy = ny / 2, cx = nx / 2;
    std::vector<std::complex<double>> k(py * px, 0.0);
    for (std::size_t iy = 0; iy < ny; ++iy)
      for (std::size_t ix = 0; ix < nx; ++ix) {
        const std::size_t ry = (iy + py - cy) % py;
        const std::size_t rx = (ix + px - cx) % px;
        k[ry * px + rx] = kernel[iy * nx + ix];
      }
    fft2_inplace(k, py, px, false);
    kernel_hat = std::move(k);
    for (const auto& v : kernel_hat) lipschitz = std::max(lipschitz, std::norm(v));
  }

  // forward: crop(ifft(K_hat * fft(pad(q)))); adjoint uses conj(K_hat)
  std::vector<double> apply(const std::vector<double>& q, bool adjoint) const {
    std::vector<std::complex<double>> buf(py * px, 0.0);
    for (std::size_t iy = 0; iy < ny; ++iy)
      for (std::size_t ix = 0; ix < nx; ++ix) buf[iy * px + ix] = q[iy * nx + ix];
    fft2_inplace(buf, py, px, false);
    for (std::size_t i = 0; i < buf.size(); ++i)
      buf[i] *= adjoint ? std::conj(kernel_hat[i]) : kernel_hat[i];
    fft2_inplace(buf, py, px, true);
    std::vector<double> out(ny * nx);
    for (std::size_t iy = 0; iy < ny; ++iy)
      for (std::size_t ix = 0; ix < nx; ++ix) out[iy * nx + ix] = buf[iy * px + ix].real();
    return out;
  }
};

}  // namespace detail

// Monotone FISTA for min 0.5 ||K (*) q - b||^2 s.t. q >= 0, convolution done
// by FFT on the padded grid, step 1/L with L = max |FFT(K)|^2. A proposed
// accelerated step is only accepted when the objective does not increase.
inline BeamMap fft_fista(const BeamMap& dirty, const std::vector<double>& psf_kernel, int iters) {
  if (iters <= 0) throw InvalidArgument("fista needs a positive iteration count");
  const detail::FistaOperator op(psf_kernel, dirty.grid);
  const std::size_t n = dirty.values.size();
  const double step = 1.0 / std::max(op.lipschitz, 1e-300);

  const auto& b = dirty.values;
  auto objective = [&](const std::vector<double>& q) {
    const auto kq = op.apply(q, false);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = kq[i] - b[i];
      s += d * d;
    }
    return 0.5 * s;
  };

  std::vector<double> x(n, 0.0), y(n, 0.0), z(n), x_prev(n);
  double fx = objective(x);
  double t = 1.0;
  for (int it = 0; it < iters; ++it) {
    const auto ky = op.apply(y, false);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = ky[i] - b[i];
    const auto grad = op.apply(resid, true);
    for (std::size_t i = 0; i < n; ++i) z[i] = std::max(0.0, y[i] - step * grad[i]);

    const double fz = objective(z);
    x_prev = x;
    double fx_new = fx;
    if (fz <= fx) {
      x = z;
      fx_new = fz;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i)
      y[i] = x[i] + (t / t_next) * (z[i] - x[i]) + ((t - 1.0) / t_next) * (x[i] - x_prev[i]);
    t = t_next;
    fx = fx_new;
  }

  BeamMap out = dirty;
  out.method = "fft-fista";
  out.values = x;
  return out;
}

// ---------------------------------------------------------------------------
// Peak extraction and exports
// ---------------------------------------------------------------------------

struct Estimate {
  double x = 0.0;
  double y = 0.0;
  double spl_db = 0.0;
};

// Grid argmax (first in row-major order on ties) plus SPL of the peak.
inline Estimate extract_estimate(const BeamMap& map) {
  std::size_t best = 0;
  double peak = 0.0;
  for (std::size_t g = 0; g < map.values.size(); ++g)
    if (map.values[g] > peak) {
      peak = map.values[g];
      best = g;
    }
  if (peak <= 0.0) throw NoSourceError("beam map has no positive peak");
  return {map.grid.node_x_of(best), map.grid.node_y_of(best), spl_from_pressure(std::sqrt(peak))};
}

inline void save_beammap_csv(const std::string& path, const BeamMap& map) {
  auto os = io::open_out(path, false);
  os << "x,y,value\n";
  char line[96];
  for (std::size_t g = 0; g < map.values.size(); ++g) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g\n", map.grid.node_x_of(g),
                  map.grid.node_y_of(g), map.values[g]);
    os << line;
  }
  if (!os) throw IoError("failed writing " + path);
}

inline void save_beammap_pgm(const std::string& path, const BeamMap& map) {
  // rows top-to-bottom = y descending, so the image reads like the plots
  std::vector<double> img(map.values.size());
  const auto nx = static_cast<std::size_t>(map.grid.nx);
  const auto ny = static_cast<std::size_t>(map.grid.ny);
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix)
      img[iy * nx + ix] = map.values[(ny - 1 - iy) * nx + ix];
  io::write_pgm(path, ny, nx, img.data(), 0.0, std::max(map.max_value(), 1e-300));
}

inline void save_beammap_sidecar(const std::string& path, const BeamMap& map) {
  nlohmann::json j;
  j["method"] = map.method;
  j["band_hz"] = {map.f_min_hz, map.f_max_hz};
  j["grid"] = {{"x_min", map.grid.x_min}, {"x_max", map.grid.x_max},
               {"y_min", map.grid.y_min}, {"y_max", map.grid.y_max},
               {"nx", map.grid.nx},       {"ny", map.grid.ny},
               {"z_plane", map.grid.z_plane}};
  auto os = io::open_out(path, false);
  os << j.dump(2) << "\n";
}

}  // namespace beamloc
