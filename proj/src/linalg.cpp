#include "gram_spectra/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gram_spectra/errors.hpp"

namespace gram_spectra::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxSweeps = 80;

void require_finite(const DenseMatrix& a, const char* op) {
  if (!a.all_finite()) throw ValidationError(std::string(op) + ": matrix has non-finite entries");
}

// Householder reflector H = I - tau v vᵀ acting on trailing rows k..n-1.
struct Reflector {
  Vector v;
  double tau = 0.0;
};

// Column-pivoted Householder QR of a tall matrix (rows >= cols).
struct PivotedQr {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector r;  // cols x cols, row-major, upper triangular
  std::vector<Reflector> reflectors;
  std::vector<std::size_t> perm;  // column k of R came from column perm[k] of A
};

PivotedQr pivoted_qr(const DenseMatrix& a, bool keep_reflectors) {
  const std::size_t n = a.rows();
  const std::size_t p = a.cols();
  // Column-major working copy: col[j] is contiguous.
  std::vector<Vector> col(p, Vector(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) col[j][i] = a(i, j);
  }

  PivotedQr qr;
  qr.rows = n;
  qr.cols = p;
  qr.perm.resize(p);
  std::iota(qr.perm.begin(), qr.perm.end(), std::size_t{0});
  if (keep_reflectors) qr.reflectors.resize(p);

  Vector norm_partial(p);
  Vector norm_exact(p);
  for (std::size_t j = 0; j < p; ++j) {
    norm_partial[j] = norm2(col[j]);
    norm_exact[j] = norm_partial[j];
  }
  const double downdate_tol = std::sqrt(kEps);

  for (std::size_t k = 0; k < p; ++k) {
    std::size_t pivot = k;
    for (std::size_t j = k + 1; j < p; ++j) {
      if (norm_partial[j] > norm_partial[pivot]) pivot = j;
    }
    if (pivot != k) {
      std::swap(col[k], col[pivot]);
      std::swap(qr.perm[k], qr.perm[pivot]);
      std::swap(norm_partial[k], norm_partial[pivot]);
      std::swap(norm_exact[k], norm_exact[pivot]);
    }

    double* x = col[k].data() + k;
    const std::size_t len = n - k;
    const double xnorm = norm2({x, len});
    double tau = 0.0;
    Vector v;
    if (xnorm > 0.0) {
      const double alpha = x[0] >= 0.0 ? -xnorm : xnorm;
      v.assign(x, x + len);
      v[0] -= alpha;
      const double vv = dot(v, v);
      tau = vv > 0.0 ? 2.0 / vv : 0.0;
      for (std::size_t j = k + 1; j < p; ++j) {
        double* y = col[j].data() + k;
        const double s = tau * dot(v, {y, len});
        for (std::size_t i = 0; i < len; ++i) y[i] -= s * v[i];
      }
      x[0] = alpha;
      std::fill(x + 1, x + len, 0.0);
    }
    if (keep_reflectors) qr.reflectors[k] = Reflector{std::move(v), tau};

    // Downdate trailing column norms, recomputing when cancellation bites.
    for (std::size_t j = k + 1; j < p; ++j) {
      if (norm_partial[j] == 0.0) continue;
      const double ratio = std::abs(col[j][k]) / norm_partial[j];
      double temp = std::max(0.0, 1.0 - ratio * ratio);
      const double scaled = norm_partial[j] / norm_exact[j];
      if (temp * scaled * scaled <= downdate_tol) {
        norm_partial[j] = k + 1 < n ? norm2({col[j].data() + k + 1, n - k - 1}) : 0.0;
        norm_exact[j] = norm_partial[j];
      } else {
        norm_partial[j] *= std::sqrt(temp);
      }
    }
  }

  qr.r.assign(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) qr.r[i * p + j] = col[j][i];
  }
  return qr;
}

// Thin Q (rows x cols, row-major) from the stored reflectors.
DenseMatrix form_q(const PivotedQr& qr) {
  const std::size_t n = qr.rows;
  const std::size_t p = qr.cols;
  DenseMatrix q(n, p);
  for (std::size_t i = 0; i < p; ++i) q(i, i) = 1.0;
  Vector s(p);
  for (std::size_t kk = p; kk-- > 0;) {
    const Reflector& h = qr.reflectors[kk];
    if (h.tau == 0.0) continue;
    std::fill(s.begin(), s.end(), 0.0);
    for (std::size_t i = 0; i < h.v.size(); ++i) {
      const double vi = h.v[i];
      const double* qi = q.row(kk + i).data();
      for (std::size_t c = 0; c < p; ++c) s[c] += vi * qi[c];
    }
    for (std::size_t i = 0; i < h.v.size(); ++i) {
      const double f = h.tau * h.v[i];
      double* qi = q.row(kk + i).data();
      for (std::size_t c = 0; c < p; ++c) qi[c] -= f * s[c];
    }
  }
  return q;
}

// One-sided Jacobi on the rows of a k x m row-major block. On return the rows
// are mutually orthogonal. If `w` is non-null it receives the accumulated
// rotations (k x k), so that rows_out = W * rows_in.
void orthogonalize_rows(Vector& g, std::size_t k, std::size_t m, Vector* w) {
  if (w != nullptr) {
    w->assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) (*w)[i * k + i] = 1.0;
  }
  const double tol = std::sqrt(static_cast<double>(std::max<std::size_t>(m, 1))) * kEps;
  // Squared row norms are updated through each rotation and refreshed every
  // sweep, or immediately when an update cancels badly.
  Vector d(k);
  auto exact_norm = [&](std::size_t i) { return dot({g.data() + i * m, m}, {g.data() + i * m, m}); };
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    for (std::size_t i = 0; i < k; ++i) d[i] = exact_norm(i);
    std::size_t rotations = 0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      double* gi = g.data() + i * m;
      for (std::size_t j = i + 1; j < k; ++j) {
        const double aa = d[i];
        const double bb = d[j];
        if (aa == 0.0 || bb == 0.0) continue;
        double* gj = g.data() + j * m;
        const double ab = dot({gi, m}, {gj, m});
        if (std::abs(ab) <= tol * std::sqrt(aa) * std::sqrt(bb)) continue;
        ++rotations;
        const double zeta = (bb - aa) / (2.0 * ab);
        double t;
        if (std::abs(zeta) > 1e150) {
          t = 0.5 / zeta;
        } else {
          t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        }
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
#pragma omp simd
        for (std::size_t q = 0; q < m; ++q) {
          const double x = gi[q];
          const double y = gj[q];
          gi[q] = cs * x - sn * y;
          gj[q] = sn * x + cs * y;
        }
        d[i] = aa - t * ab;
        d[j] = bb + t * ab;
        if (d[i] < 0.25 * aa) d[i] = exact_norm(i);
        if (d[j] < 0.25 * bb) d[j] = exact_norm(j);
        if (w != nullptr) {
          double* wi = w->data() + i * k;
          double* wj = w->data() + j * k;
#pragma omp simd
          for (std::size_t q = 0; q < k; ++q) {
            const double x = wi[q];
            const double y = wj[q];
            wi[q] = cs * x - sn * y;
            wj[q] = sn * x + cs * y;
          }
        }
      }
    }
    if (rotations == 0) return;
  }
  throw NumericalError("one-sided Jacobi did not converge");
}

std::vector<std::size_t> descending_order(const Vector& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
  return order;
}

// Singular values of a tall matrix (rows >= cols) plus optional vectors.
SvdResult tall_svd(const DenseMatrix& a, bool want_vectors) {
  const std::size_t n = a.rows();
  const std::size_t p = a.cols();
  PivotedQr qr = pivoted_qr(a, want_vectors);
  Vector g = std::move(qr.r);
  Vector w;
  orthogonalize_rows(g, p, p, want_vectors ? &w : nullptr);

  Vector sigma(p);
  for (std::size_t i = 0; i < p; ++i) sigma[i] = norm2({g.data() + i * p, p});
  const std::vector<std::size_t> order = descending_order(sigma);

  SvdResult out;
  out.s.resize(p);
  for (std::size_t c = 0; c < p; ++c) out.s[c] = sigma[order[c]];
  if (!want_vectors) return out;

  // R = Wᵀ G, so A P = (Q Wᵀ) diag(s) (rows of G / s).
  const DenseMatrix q = form_q(qr);
  DenseMatrix w_sorted(p, p);
  for (std::size_t c = 0; c < p; ++c) {
    std::copy_n(w.data() + order[c] * p, p, w_sorted.row(c).data());
  }
  out.u = multiply_transposed_right(q, w_sorted);

  // Right vectors in pivoted coordinates; complete the basis where s == 0.
  DenseMatrix vp(p, p);  // row c = right vector c (pivoted coordinates)
  std::vector<bool> filled(p, false);
  for (std::size_t c = 0; c < p; ++c) {
    const double sc = out.s[c];
    if (sc < std::numeric_limits<double>::min()) continue;
    const double* gi = g.data() + order[c] * p;
    for (std::size_t t = 0; t < p; ++t) vp(c, t) = gi[t] / sc;
    filled[c] = true;
  }
  std::size_t candidate = 0;
  for (std::size_t c = 0; c < p; ++c) {
    if (filled[c]) continue;
    while (candidate < p) {
      Vector e(p, 0.0);
      e[candidate++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t d = 0; d < p; ++d) {
          if (!filled[d]) continue;
          const double proj = dot(vp.row(d), e);
          for (std::size_t t = 0; t < p; ++t) e[t] -= proj * vp(d, t);
        }
      }
      const double nrm = norm2(e);
      if (nrm > 0.5) {
        for (std::size_t t = 0; t < p; ++t) vp(c, t) = e[t] / nrm;
        filled[c] = true;
        break;
      }
    }
  }
  out.v = DenseMatrix(p, p);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t t = 0; t < p; ++t) out.v(qr.perm[t], c) = vp(c, t);
  }
  (void)n;
  return out;
}

// Cyclic two-sided Jacobi on a symmetric matrix held in `a` (overwritten).
// Returns eigenvalues in storage order; eigenvectors as rows of `vt`.
Vector jacobi_eigen(DenseMatrix& a, DenseMatrix* vt) {
  const std::size_t n = a.rows();
  if (vt != nullptr) *vt = DenseMatrix::identity(n);
  const double abs_floor = kEps * frobenius_norm(a) * 1e-3;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    std::size_t rotations = 0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double mag = std::abs(apq);
        if (mag <= abs_floor || mag <= kEps * std::sqrt(std::abs(app)) * std::sqrt(std::abs(aqq))) {
          continue;
        }
        ++rotations;
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          const double np = c * arp - s * arq;
          const double nq = s * arp + c * arq;
          a(r, p) = np;
          a(p, r) = np;
          a(r, q) = nq;
          a(q, r) = nq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        if (vt != nullptr) {
          double* vp = vt->row(p).data();
          double* vq = vt->row(q).data();
          for (std::size_t r = 0; r < n; ++r) {
            const double x = vp[r];
            const double y = vq[r];
            vp[r] = c * x - s * y;
            vq[r] = s * x + c * y;
          }
        }
      }
    }
    if (rotations == 0) break;
    if (sweep + 1 == kMaxSweeps) throw NumericalError("Jacobi eigensolver did not converge");
  }
  Vector values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  return values;
}

DenseMatrix symmetrized_copy(const DenseMatrix& s, const char* op) {
  if (!s.is_square()) throw ValidationError(std::string(op) + ": matrix is not square");
  require_finite(s, op);
  if (asymmetry(s) > 1e-12) throw ValidationError(std::string(op) + ": matrix is not symmetric");
  DenseMatrix a = s;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = m;
      a(j, i) = m;
    }
  }
  return a;
}

}  // namespace

SvdResult svd(const DenseMatrix& a) {
  require_finite(a, "svd");
  if (a.rows() == 0 || a.cols() == 0) return SvdResult{};
  if (a.rows() >= a.cols()) return tall_svd(a, true);
  SvdResult t = tall_svd(a.transposed(), true);
  std::swap(t.u, t.v);
  return t;
}

Vector singular_values(const DenseMatrix& a) {
  require_finite(a, "singular_values");
  if (a.rows() == 0 || a.cols() == 0) return {};
  if (a.rows() >= a.cols()) return tall_svd(a, false).s;
  return tall_svd(a.transposed(), false).s;
}

SpectralSummary summarize_spectrum(Vector spectrum) {
  SpectralSummary out;
  if (spectrum.empty()) throw ValidationError("spectral_summary: empty spectrum");
  out.s_max = spectrum.front();
  out.s_min = spectrum.back();
  out.kappa = out.s_min > 0.0 ? out.s_max / out.s_min : std::numeric_limits<double>::infinity();
  if (out.s_max == 0.0) out.kappa = std::numeric_limits<double>::infinity();
  out.spectrum = std::move(spectrum);
  return out;
}

SpectralSummary spectral_summary(const DenseMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw ValidationError("spectral_summary: matrix needs min(rows, cols) >= 1");
  }
  return summarize_spectrum(singular_values(a));
}

EigenDecomposition sym_eig(const DenseMatrix& s) {
  DenseMatrix a = symmetrized_copy(s, "sym_eig");
  DenseMatrix vt;
  const Vector raw = jacobi_eigen(a, &vt);
  const std::vector<std::size_t> order = descending_order(raw);
  const std::size_t n = raw.size();
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = raw[order[c]];
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = vt(order[c], r);
  }
  return out;
}

Vector sym_eigenvalues(const DenseMatrix& s) {
  DenseMatrix a = symmetrized_copy(s, "sym_eigenvalues");
  Vector values = jacobi_eigen(a, nullptr);
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

DenseMatrix sqrt_psd(const DenseMatrix& s) {
  const EigenDecomposition eig = sym_eig(s);
  const std::size_t n = eig.values.size();
  double scale = 0.0;
  for (double v : eig.values) scale = std::max(scale, std::abs(v));
  Vector root(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = eig.values[i];
    if (lambda < -1e-10 * scale) {
      throw ValidationError("sqrt_psd: matrix is not positive semi-definite (eigenvalue " +
                            std::to_string(lambda) + ")");
    }
    root[i] = std::sqrt(std::max(lambda, 0.0));
  }
  DenseMatrix scaled = eig.vectors;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) scaled(r, c) *= root[c];
  }
  DenseMatrix out = multiply_transposed_right(scaled, eig.vectors);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = 0.5 * (out(i, j) + out(j, i));
      out(i, j) = m;
      out(j, i) = m;
    }
  }
  return out;
}

double default_rank_tol(std::size_t rows, std::size_t cols, double s_max) {
  return static_cast<double>(std::max(rows, cols)) * kEps * s_max;
}

DenseMatrix pinv(const DenseMatrix& a, std::optional<double> rank_tol) {
  const SvdResult f = svd(a);
  DenseMatrix out(a.cols(), a.rows());
  if (f.s.empty()) return out;
  const double tol = rank_tol.value_or(default_rank_tol(a.rows(), a.cols(), f.s.front()));
  // A⁺ = V diag(1/s) Uᵀ over the retained singular triplets.
  for (std::size_t k = 0; k < f.s.size(); ++k) {
    if (!(f.s[k] > tol) || f.s[k] == 0.0) continue;
    const double inv = 1.0 / f.s[k];
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double vik = f.v(i, k) * inv;
      if (vik == 0.0) continue;
      double* oi = out.row(i).data();
      for (std::size_t j = 0; j < a.rows(); ++j) oi[j] += vik * f.u(j, k);
    }
  }
  return out;
}

std::size_t numerical_rank(const DenseMatrix& a, std::optional<double> rank_tol) {
  const Vector s = singular_values(a);
  if (s.empty()) return 0;
  const double tol = rank_tol.value_or(default_rank_tol(a.rows(), a.cols(), s.front()));
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [&](double v) { return v > tol && v > 0.0; }));
}

double spectral_norm(const DenseMatrix& a) {
  const Vector s = singular_values(a);
  return s.empty() ? 0.0 : s.front();
}

double symmetric_spectral_norm(const DenseMatrix& s) {
  const Vector values = sym_eigenvalues(s);
  if (values.empty()) return 0.0;
  return std::max(std::abs(values.front()), std::abs(values.back()));
}

}  // namespace gram_spectra::linalg
