#pragma once

#include "flexsusp/analysis.hpp"
#include "flexsusp/suspension.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace flexsusp {

inline constexpr const char* kSchemaVersion = "1.0";

// Canonical document text: fixed key order, two-space indent, arrays on one
// line, numbers in the shortest form that round-trips.
std::string save_suspension(const ConstructedSuspension& s);

// Throws ParseError (with line), SchemaVersionError or ValidationError
// (with the offending field).
ConstructedSuspension load_suspension(const std::string& text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

ConstructedSuspension read_suspension(const std::filesystem::path& path);
void write_suspension(const std::filesystem::path& path, const ConstructedSuspension& s);

// Header plus one row per sample: z, gap, volume, eps_k, delta_k, Delta_k,
// feasible. Infeasible samples leave the numeric cells empty.
std::string trace_csv(const DihedralTrace& t);

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;  // 0-based
};

// u, w, v_1..v_N then upper faces (u, v_{k+1}, v_k) and lower faces
// (w, v_k, v_{k+1}).
Mesh mesh_of(const Embedding& e);
std::string obj_text(const Mesh& m);
Mesh parse_obj(const std::string& text);

// Writes frame_000.obj, ... at Chebyshev samples of the flexion interval and
// a manifest.csv listing frame, file and z. Returns the frame paths.
std::vector<std::filesystem::path> export_mesh_frames(const ConstructedSuspension& s, int frames,
                                                      const std::filesystem::path& dir);

}  // namespace flexsusp
