#include "flexsusp/geometry.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace flexsusp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::InfeasibleRadius: return "InfeasibleRadius";
    case ErrorKind::InfeasibleTurn: return "InfeasibleTurn";
    case ErrorKind::EmptyInterval: return "EmptyInterval";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::PoleAtZero: return "PoleAtZero";
    case ErrorKind::PoleError: return "PoleError";
    case ErrorKind::SingularR: return "SingularR";
    case ErrorKind::UndefinedDihedral: return "UndefinedDihedral";
    case ErrorKind::InvalidHalfParams: return "InvalidHalfParams";
    case ErrorKind::FlexCertificationFailed: return "FlexCertificationFailed";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::ClassificationUnavailable: return "ClassificationUnavailable";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaVersionError: return "SchemaVersionError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message, std::optional<int> index) {
  std::string s{to_string(kind)};
  if (index) s += " at index " + std::to_string(*index);
  if (!message.empty()) s += ": " + message;
  return s;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::optional<int> index)
    : std::runtime_error(decorate(kind, message, index)), kind_(kind), index_(index) {}

std::string_view to_string(SuspensionType t) {
  switch (t) {
    case SuspensionType::I_OEE: return "I_OEE";
    case SuspensionType::II_AEE: return "II_AEE";
    case SuspensionType::II_OEE: return "II_OEE";
    case SuspensionType::III_OAE: return "III_OAE";
    case SuspensionType::III_OAS: return "III_OAS";
  }
  return "?";
}

std::optional<SuspensionType> parse_type(std::string_view s) {
  for (auto t : {SuspensionType::I_OEE, SuspensionType::II_AEE, SuspensionType::II_OEE,
                 SuspensionType::III_OAE, SuspensionType::III_OAS}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

bool is_type_iii(SuspensionType t) {
  return t == SuspensionType::III_OAE || t == SuspensionType::III_OAS;
}

SuspensionParams equal_length_params(int n, double length) {
  SuspensionParams p;
  p.n = n;
  p.l.assign(n, length);
  p.m.assign(n, length);
  p.L.assign(n, length);
  return p;
}

namespace {

bool strict_triangle(double a, double b, double c) {
  return a > 0 && b > 0 && c > 0 && a + b > c && a + c > b && b + c > a;
}

}  // namespace

double face_angle(double a, double b, double opposite) {
  const double c = opposite;
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !strict_triangle(a, b, c))
    throw Error(ErrorKind::DegenerateTriangle, "sides do not form a proper triangle");
  // Kahan's needle-safe form of the law of cosines.
  if (a < b) std::swap(a, b);
  const double mu = (b >= c) ? c - (a - b) : b - (a - c);
  const double num = ((a - b) + c) * mu;
  const double den = (a + (b + c)) * ((a - c) + b);
  return 2.0 * std::atan(std::sqrt(num / den));
}

FaceAngles face_angles_of(const SuspensionParams& p) {
  const auto report = validate_params(p);
  if (!report.ok()) {
    for (const auto& v : report.items)
      if (v.what.find("triangle") != std::string::npos) throw Error(ErrorKind::DegenerateTriangle, v.what, v.index);
    throw Error(ErrorKind::InvalidParams, report.summary());
  }
  const int n = p.n;
  FaceAngles f;
  for (auto* v : {&f.alpha, &f.beta, &f.gamma, &f.A, &f.B, &f.Gamma}) v->resize(n);
  for (int k = 0; k < n; ++k) {
    const int j = wrap(k + 1, n);
    try {
      f.alpha[k] = face_angle(p.l[k], p.l[j], p.L[k]);
      f.beta[k] = face_angle(p.l[k], p.L[k], p.l[j]);
      f.gamma[k] = face_angle(p.l[j], p.L[k], p.l[k]);
      f.A[k] = face_angle(p.m[k], p.m[j], p.L[k]);
      f.B[k] = face_angle(p.m[k], p.L[k], p.m[j]);
      f.Gamma[k] = face_angle(p.m[j], p.L[k], p.m[k]);
    } catch (const Error& e) {
      throw Error(e.kind(), "face", k + 1);
    }
  }
  return f;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) os << "; ";
    os << items[i].what;
    if (items[i].index) os << " (k=" << items[i].index << ")";
  }
  return os.str();
}

ValidationReport validate_params(const SuspensionParams& p) {
  ValidationReport r;
  const int n = p.n;
  if (n % 2 != 0) r.items.push_back({"parity", 0});
  if (n < 6) r.items.push_back({"N below 6", 0});
  if (n <= 0 || static_cast<int>(p.l.size()) != n || static_cast<int>(p.m.size()) != n ||
      static_cast<int>(p.L.size()) != n) {
    r.items.push_back({"array length differs from N", 0});
    return r;
  }
  auto positive = [&](const std::vector<double>& v, const char* name) {
    for (int k = 0; k < n; ++k)
      if (!std::isfinite(v[k]) || v[k] <= 0) r.items.push_back({std::string("non-positive ") + name, k + 1});
  };
  positive(p.l, "l");
  positive(p.m, "m");
  positive(p.L, "L");
  if (!r.ok()) return r;
  for (int k = 0; k < n; ++k) {
    const int j = wrap(k + 1, n);
    if (!strict_triangle(p.l[k], p.l[j], p.L[k])) r.items.push_back({"upper face triangle inequality", k + 1});
    if (!strict_triangle(p.m[k], p.m[j], p.L[k])) r.items.push_back({"lower face triangle inequality", k + 1});
  }
  return r;
}

void require_valid(const SuspensionParams& p) {
  auto r = validate_params(p);
  if (r.ok()) return;
  std::optional<int> index;
  if (r.items.front().index) index = r.items.front().index;
  throw Error(ErrorKind::InvalidParams, r.summary(), index);
}

}  // namespace flexsusp
