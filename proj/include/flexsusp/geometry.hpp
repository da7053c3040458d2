#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flexsusp {

using Vec3 = Eigen::Vector3d;
inline constexpr double pi = std::numbers::pi;

enum class ErrorKind {
  DegenerateTriangle,
  InvalidParams,
  InfeasibleRadius,
  InfeasibleTurn,
  EmptyInterval,
  OutOfRange,
  PoleAtZero,
  PoleError,
  SingularR,
  UndefinedDihedral,
  InvalidHalfParams,
  FlexCertificationFailed,
  DegenerateConfiguration,
  ClassificationUnavailable,
  ParseError,
  SchemaVersionError,
  ValidationError,
};

std::string_view to_string(ErrorKind kind);

// Every failure in the library is reported through this type. The index, when
// present, is 1-based (vertex, face or edge number as in the notation).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<int> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<int> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<int> index_;
};

enum class SuspensionType { I_OEE, II_AEE, II_OEE, III_OAE, III_OAS };

std::string_view to_string(SuspensionType t);
std::optional<SuspensionType> parse_type(std::string_view s);
bool is_type_iii(SuspensionType t);

// Edge lengths of a dipyramid with apexes u, w and equator v_1..v_n.
// Storage is 0-based: l[k-1] is the edge u-v_k, L[k-1] the edge v_k-v_{k+1}
// with v_{n+1} = v_1.
struct SuspensionParams {
  int n = 0;
  std::vector<double> l;
  std::vector<double> m;
  std::vector<double> L;

  int half() const { return n / 2; }
  bool operator==(const SuspensionParams&) const = default;
};

SuspensionParams equal_length_params(int n, double length = 1.0);

// Face k (1-based) has upper triangle (u, v_k, v_{k+1}) with angles alpha at u,
// beta at v_k, gamma at v_{k+1}; the lower triangle (w, v_k, v_{k+1}) has A, B,
// Gamma in the same positions. Stored 0-based.
struct FaceAngles {
  std::vector<double> alpha, beta, gamma;
  std::vector<double> A, B, Gamma;
};

// Angle between sides a and b of a triangle whose third side is `opposite`.
double face_angle(double a, double b, double opposite);

FaceAngles face_angles_of(const SuspensionParams& p);

struct Violation {
  std::string what;
  int index = 0;  // 1-based, 0 for whole-object violations
};

struct ValidationReport {
  std::vector<Violation> items;

  bool ok() const { return items.empty(); }
  std::string summary() const;
};

ValidationReport validate_params(const SuspensionParams& p);

// Throws Error(InvalidParams) carrying the report summary.
void require_valid(const SuspensionParams& p);

inline int wrap(int k, int n) { return ((k % n) + n) % n; }

}  // namespace flexsusp
