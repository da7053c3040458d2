#pragma once

#include "flexsusp/geometry.hpp"

#include <vector>

namespace flexsusp {

// s[k-1] is the sign applied to the turn angle between v_k and v_{k+1}.
using SignPattern = std::vector<int>;

struct Theta1Rule {
  enum class Kind { Fixed, SymmetricHalf };
  Kind kind = Kind::Fixed;
  double value = 0.0;

  static Theta1Rule fixed(double v) { return {Kind::Fixed, v}; }
  static Theta1Rule symmetric_half() { return {Kind::SymmetricHalf, 0.0}; }
  bool operator==(const Theta1Rule&) const = default;
};

// +1 on the first M turns, -1 on the remaining M-1.
SignPattern default_signs(int n);

struct Embedding {
  double z = 0.0;
  Vec3 u, w;
  std::vector<Vec3> v;        // v[k-1] = v_k
  std::vector<double> r;      // distance of v_k from the apex axis
  std::vector<double> theta;  // azimuth of v_k
  std::vector<double> zoff;   // height of v_k
  std::vector<double> turn;   // unsigned turn angles, n-1 entries
  int clamped = 0;            // turn cosines pulled back from just outside [-1, 1]

  int n() const { return static_cast<int>(v.size()); }
  // All n+2 points in the order u, w, v_1..v_n.
  std::vector<Vec3> points() const;
};

struct FlexionInterval {
  double z_lo = 0.0;
  double z_hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;

  double width() const { return z_hi - z_lo; }
};

double axial_offset(double l, double m, double z);
double radial_distance(double l, double m, double z);
double turn_angle(double r_k, double r_next, double L_k, double zoff_k, double zoff_next,
                  int* clamped = nullptr);

Embedding embed(const SuspensionParams& p, double z, const Theta1Rule& theta1, const SignPattern& signs);

double closure_gap(const Embedding& e, double L_N);

// True iff embed would succeed at z (radicands and turn cosines in range).
bool embeddable(const SuspensionParams& p, double z);

FlexionInterval flexion_interval(const SuspensionParams& p, const Theta1Rule& theta1, const SignPattern& signs);
FlexionInterval flexion_interval(const SuspensionParams& p);

double dihedral_from_z(double l, double m, double beta, double B, double z);

// Chebyshev nodes strictly inside the interval, ascending. `fraction` keeps
// only the central part of the interval (0.8 keeps the central 80%).
std::vector<double> chebyshev_samples(const FlexionInterval& iv, int count, double fraction = 1.0);

}  // namespace flexsusp
