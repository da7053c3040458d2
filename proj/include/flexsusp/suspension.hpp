#pragma once

#include "flexsusp/coords.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace flexsusp {

enum class VertexClass { OAE, OAS };

// Full edge data together with the branch choices that make the coordinate
// model close up, plus free-form provenance of the generator.
struct ConstructedSuspension {
  SuspensionParams params;
  SuspensionType type = SuspensionType::I_OEE;
  Theta1Rule theta1;
  SignPattern signs;
  std::map<std::string, std::string> provenance;
  std::optional<int> fold_L;  // Type III-OAE only

  bool operator==(const ConstructedSuspension&) const = default;
};

// Per-vertex OAE/OAS classification of a Type III suspension. Throws
// ClassificationUnavailable for the symmetric types.
std::vector<VertexClass> vertex_classes(const ConstructedSuspension& s);
std::vector<VertexClass> vertex_classes(SuspensionType t, int n, std::optional<int> fold_L);

}  // namespace flexsusp
