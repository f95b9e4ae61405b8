#include "gram_spectra/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gram_spectra/errors.hpp"
#include "gram_spectra/linalg.hpp"

namespace gram_spectra::ensembles {

namespace {

Vector parse_number_list(const std::string& text) {
  Vector out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ValidationError("covariance: cannot parse number '" + item + "'");
    }
    if (used != item.size()) throw ValidationError("covariance: cannot parse number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::identity: return "identity";
    case CovarianceKind::scaled_identity: return "scaled_identity";
    case CovarianceKind::diagonal: return "diagonal";
    case CovarianceKind::ar1: return "ar1";
    case CovarianceKind::explicit_matrix: return "explicit";
  }
  return "unknown";
}

CovarianceModel CovarianceModel::identity(std::size_t p) {
  if (p == 0) throw ValidationError("covariance: dimension must be >= 1");
  CovarianceModel m;
  m.kind_ = CovarianceKind::identity;
  m.sigma_ = DenseMatrix::identity(p);
  m.sqrt_ = m.sigma_;
  m.inverse_ = m.sigma_;
  return m;
}

CovarianceModel CovarianceModel::scaled_identity(std::size_t p, double c) {
  if (p == 0) throw ValidationError("covariance: dimension must be >= 1");
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("covariance: scale must be positive and finite");
  CovarianceModel m;
  m.kind_ = CovarianceKind::scaled_identity;
  m.params_ = {c};
  m.scale_ = c;
  m.sigma_ = DenseMatrix::identity(p) * c;
  m.sqrt_ = DenseMatrix::identity(p) * std::sqrt(c);
  m.inverse_ = DenseMatrix::identity(p) * (1.0 / c);
  m.c_min_ = c;
  m.c_max_ = c;
  return m;
}

CovarianceModel CovarianceModel::diagonal(Vector values) {
  if (values.empty()) throw ValidationError("covariance: dimension must be >= 1");
  CovarianceModel m;
  m.kind_ = CovarianceKind::diagonal;
  m.sigma_ = DenseMatrix::diagonal(values);
  m.params_ = std::move(values);
  m.certify();
  return m;
}

CovarianceModel CovarianceModel::ar1(std::size_t p, double rho) {
  if (p == 0) throw ValidationError("covariance: dimension must be >= 1");
  if (!(std::abs(rho) < 1.0)) throw ValidationError("covariance: ar1 requires |rho| < 1");
  CovarianceModel m;
  m.kind_ = CovarianceKind::ar1;
  m.params_ = {rho};
  m.sigma_ = DenseMatrix(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      m.sigma_(i, j) = std::pow(rho, static_cast<double>(i > j ? i - j : j - i));
    }
  }
  m.certify();
  return m;
}

CovarianceModel CovarianceModel::from_matrix(const DenseMatrix& sigma) {
  if (sigma.rows() == 0) throw ValidationError("covariance: dimension must be >= 1");
  CovarianceModel m;
  m.kind_ = CovarianceKind::explicit_matrix;
  m.sigma_ = sigma;
  m.certify();
  return m;
}

void CovarianceModel::certify() {
  const linalg::EigenDecomposition eig = linalg::sym_eig(sigma_);
  c_max_ = eig.values.front();
  c_min_ = eig.values.back();
  if (!(c_min_ > 0.0) || !std::isfinite(c_max_)) {
    throw ValidationError("covariance: eigenvalues must lie in (0, inf); smallest is " +
                          format_number(c_min_));
  }
  const std::size_t p = sigma_.rows();
  DenseMatrix root_scaled = eig.vectors;
  DenseMatrix inv_scaled = eig.vectors;
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) {
      root_scaled(r, c) *= std::sqrt(eig.values[c]);
      inv_scaled(r, c) /= eig.values[c];
    }
  }
  sqrt_ = multiply_transposed_right(root_scaled, eig.vectors);
  inverse_ = multiply_transposed_right(inv_scaled, eig.vectors);
  if (kind_ == CovarianceKind::diagonal) {
    // Exact for diagonal inputs.
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        sqrt_(i, j) = i == j ? std::sqrt(sigma_(i, i)) : 0.0;
        inverse_(i, j) = i == j ? 1.0 / sigma_(i, i) : 0.0;
      }
    }
  }
}

double CovarianceModel::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < sigma_.rows(); ++i) t += sigma_(i, i);
  return t;
}

bool CovarianceModel::isotropic() const {
  return kind_ == CovarianceKind::identity || kind_ == CovarianceKind::scaled_identity;
}

CovarianceModel CovarianceModel::parse(const std::string& text, std::size_t p) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "identity") {
    if (!tail.empty()) throw ValidationError("covariance: 'identity' takes no parameters");
    return identity(p);
  }
  const Vector values = parse_number_list(tail);
  if (head == "scaled" || head == "scaled_identity") {
    if (values.size() != 1) throw ValidationError("covariance: 'scaled' needs one value");
    return scaled_identity(p, values[0]);
  }
  if (head == "diag" || head == "diagonal") {
    if (values.size() != p) {
      throw ValidationError("covariance: 'diag' needs " + std::to_string(p) + " values, got " +
                            std::to_string(values.size()));
    }
    return diagonal(values);
  }
  if (head == "ar1") {
    if (values.size() != 1) throw ValidationError("covariance: 'ar1' needs one value");
    return ar1(p, values[0]);
  }
  throw ValidationError("covariance: unknown kind '" + head + "'");
}

std::string CovarianceModel::to_text() const {
  switch (kind_) {
    case CovarianceKind::identity: return "identity";
    case CovarianceKind::scaled_identity: return "scaled:" + format_number(params_[0]);
    case CovarianceKind::ar1: return "ar1:" + format_number(params_[0]);
    case CovarianceKind::diagonal: {
      std::string s = "diag:";
      for (std::size_t i = 0; i < params_.size(); ++i) s += (i ? "," : "") + format_number(params_[i]);
      return s;
    }
    case CovarianceKind::explicit_matrix: return "explicit";
  }
  return "unknown";
}

nlohmann::json CovarianceModel::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  switch (kind_) {
    case CovarianceKind::identity: j["params"] = nlohmann::json::object(); break;
    case CovarianceKind::scaled_identity: j["params"] = {{"c", params_[0]}}; break;
    case CovarianceKind::diagonal: j["params"] = {{"values", params_}}; break;
    case CovarianceKind::ar1: j["params"] = {{"rho", params_[0]}}; break;
    case CovarianceKind::explicit_matrix: {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t i = 0; i < sigma_.rows(); ++i) {
        rows.push_back(Vector(sigma_.row(i).begin(), sigma_.row(i).end()));
      }
      j["params"] = {{"matrix", rows}};
      break;
    }
  }
  return j;
}

CovarianceModel CovarianceModel::from_json(const nlohmann::json& j, std::size_t p) {
  if (!j.is_object() || !j.contains("kind")) throw ValidationError("covariance: missing field 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  try {
    if (kind == "identity") return identity(p);
    if (kind == "scaled_identity") return scaled_identity(p, params.at("c").get<double>());
    if (kind == "diagonal") {
      auto values = params.at("values").get<Vector>();
      if (values.size() != p) throw ValidationError("covariance: diagonal length differs from p");
      return diagonal(std::move(values));
    }
    if (kind == "ar1") return ar1(p, params.at("rho").get<double>());
    if (kind == "explicit") {
      const auto rows = params.at("matrix").get<std::vector<Vector>>();
      DenseMatrix m(rows.size(), rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw ValidationError("covariance: matrix is not square");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
      }
      if (m.rows() != p) throw ValidationError("covariance: matrix dimension differs from p");
      return from_matrix(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("covariance.params: ") + e.what());
  }
  throw ValidationError("covariance: unknown kind '" + kind + "'");
}

std::string to_string(EntryLaw law) {
  return law == EntryLaw::gaussian ? "gaussian" : "counterexample";
}

EntryLaw parse_entry_law(const std::string& text) {
  if (text == "gaussian") return EntryLaw::gaussian;
  if (text == "counterexample") return EntryLaw::counterexample;
  throw ValidationError("entry_law: expected 'gaussian' or 'counterexample', got '" + text + "'");
}

void DesignSpec::validate() const {
  if (n == 0 || p == 0) throw ValidationError("design: n and p must be >= 1");
  if (covariance.dimension() != p) {
    throw ValidationError("design: covariance dimension " + std::to_string(covariance.dimension()) +
                          " does not match p = " + std::to_string(p));
  }
  if (law == EntryLaw::counterexample && covariance.kind() != CovarianceKind::identity) {
    throw ValidationError("design: the counterexample law has i.i.d. entries and requires identity covariance");
  }
}

DesignSpec DesignSpec::gaussian(std::size_t n, std::size_t p) {
  return DesignSpec{n, p, CovarianceModel::identity(p), EntryLaw::gaussian};
}

DesignSpec DesignSpec::counterexample(std::size_t n, std::size_t p) {
  return DesignSpec{n, p, CovarianceModel::identity(p), EntryLaw::counterexample};
}

nlohmann::json DesignSpec::to_json() const {
  return {{"n", n}, {"p", p}, {"covariance", covariance.to_json()}, {"entry_law", to_string(law)}};
}

DesignSpec DesignSpec::from_json(const nlohmann::json& j) {
  for (const char* key : {"n", "p"}) {
    if (!j.contains(key)) throw ValidationError(std::string("design: missing required field '") + key + "'");
  }
  DesignSpec spec;
  try {
    spec.n = j.at("n").get<std::size_t>();
    spec.p = j.at("p").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("design: ") + e.what());
  }
  if (spec.p == 0) throw ValidationError("design: p must be >= 1");
  spec.covariance = j.contains("covariance") ? CovarianceModel::from_json(j.at("covariance"), spec.p)
                                             : CovarianceModel::identity(spec.p);
  spec.law = parse_entry_law(j.value("entry_law", std::string("gaussian")));
  spec.validate();
  return spec;
}

DenseMatrix gaussian_iid(std::size_t n, std::size_t p, rng::Generator& gen) {
  DenseMatrix z(n, p);
  for (double& v : z.entries()) v = rng::standard_normal(gen);
  return z;
}

DenseMatrix correlated_gaussian(const DesignSpec& spec, rng::Generator& gen) {
  spec.validate();
  if (spec.law != EntryLaw::gaussian) throw ValidationError("correlated_gaussian: entry law must be gaussian");
  DenseMatrix z = gaussian_iid(spec.n, spec.p, gen);
  switch (spec.covariance.kind()) {
    case CovarianceKind::identity: return z;
    case CovarianceKind::scaled_identity: return z * std::sqrt(spec.covariance.isotropic_scale());
    default: return multiply(z, spec.covariance.sqrt_matrix());
  }
}

DenseMatrix counterexample_matrix(std::size_t n, std::size_t p, rng::Generator& gen) {
  DenseMatrix x(n, p);
  for (double& v : x.entries()) {
    const int sign = rng::rademacher(gen);
    v = sign * rng::counterexample_u(gen);
  }
  return x;
}

DenseMatrix draw_design(const DesignSpec& spec, rng::Generator& gen) {
  if (spec.law == EntryLaw::counterexample) {
    spec.validate();
    return counterexample_matrix(spec.n, spec.p, gen);
  }
  return correlated_gaussian(spec, gen);
}

DenseMatrix gram(const DenseMatrix& x) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  DenseMatrix s(p, p);
  for (std::size_t k = 0; k < n; ++k) {
    const double* xk = x.row(k).data();
    for (std::size_t i = 0; i < p; ++i) {
      const double xi = xk[i];
      if (xi == 0.0) continue;
      double* si = s.row(i).data();
      for (std::size_t j = i; j < p; ++j) si[j] += xi * xk[j];
    }
  }
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      s(i, j) *= inv_n;
      s(j, i) = s(i, j);
    }
  }
  return s;
}

}  // namespace gram_spectra::ensembles
