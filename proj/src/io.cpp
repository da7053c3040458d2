#include "flexsusp/io.hpp"

#include "flexsusp/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace flexsusp {

namespace {

using nlohmann::json;

std::string quoted(const std::string& s) { return json(s).dump(); }

std::string array(const std::vector<double>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + number(xs[i]);
  return s + "]";
}

std::string array(const std::vector<int>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + std::to_string(xs[i]);
  return s + "]";
}

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ValidationError, "field '" + field + "': " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) invalid(path + key, "missing");
  return obj.at(key);
}

std::vector<double> lengths(const json& j, const std::string& field) {
  if (!j.is_array()) invalid(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) invalid(field + "[" + std::to_string(i + 1) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

std::optional<SuspensionType> type_from_tag(std::string tag) {
  for (auto& c : tag) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return parse_type(tag);
}

}  // namespace

std::string save_suspension(const ConstructedSuspension& s) {
  const auto& p = s.params;
  std::string t = "{\n";
  t += "  \"schema_version\": " + quoted(kSchemaVersion) + ",\n";
  t += "  \"type\": " + quoted(std::string(to_string(s.type))) + ",\n";
  t += "  \"N\": " + std::to_string(p.n) + ",\n";
  t += "  \"lengths\": {\n";
  t += "    \"l\": " + array(p.l) + ",\n";
  t += "    \"m\": " + array(p.m) + ",\n";
  t += "    \"L\": " + array(p.L) + "\n";
  t += "  },\n";
  if (s.theta1.kind == Theta1Rule::Kind::SymmetricHalf)
    t += "  \"theta1\": {\"rule\": \"symmetric_half\"},\n";
  else
    t += "  \"theta1\": {\"rule\": \"fixed\", \"value\": " + number(s.theta1.value) + "},\n";
  t += "  \"signs\": " + array(s.signs) + ",\n";
  if (s.fold_L) t += "  \"fold_L\": " + std::to_string(*s.fold_L) + ",\n";
  t += "  \"provenance\": {";
  bool first = true;
  for (const auto& [k, v] : s.provenance) {
    t += (first ? "\n" : ",\n") + std::string("    ") + quoted(k) + ": " + quoted(v);
    first = false;
  }
  t += first ? "}\n" : "\n  }\n";
  t += "}\n";
  return t;
}

ConstructedSuspension load_suspension(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
    const int line = 1 + static_cast<int>(std::count(upto.begin(), upto.end(), '\n'));
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "line 1: document must be an object");

  const auto& version = member(doc, "schema_version", "");
  if (!version.is_string()) invalid("schema_version", "expected a string");
  if (version.get<std::string>() != kSchemaVersion)
    throw Error(ErrorKind::SchemaVersionError, "unsupported schema_version '" + version.get<std::string>() + "'");

  ConstructedSuspension s;
  const auto& tag = member(doc, "type", "");
  if (!tag.is_string()) invalid("type", "expected a string");
  const auto type = type_from_tag(tag.get<std::string>());
  if (!type) invalid("type", "unknown type '" + tag.get<std::string>() + "'");
  s.type = *type;

  const auto& n = member(doc, "N", "");
  if (!n.is_number_integer()) invalid("N", "expected an integer");
  s.params.n = n.get<int>();
  const auto& len = member(doc, "lengths", "");
  s.params.l = lengths(member(len, "l", "lengths."), "lengths.l");
  s.params.m = lengths(member(len, "m", "lengths."), "lengths.m");
  s.params.L = lengths(member(len, "L", "lengths."), "lengths.L");
  const auto report = validate_params(s.params);
  if (!report.ok()) invalid("lengths", report.summary());

  const auto& th = member(doc, "theta1", "");
  const auto& rule = member(th, "rule", "theta1.");
  if (rule == "symmetric_half") {
    s.theta1 = Theta1Rule::symmetric_half();
  } else if (rule == "fixed") {
    const auto& v = member(th, "value", "theta1.");
    if (!v.is_number()) invalid("theta1.value", "expected a number");
    s.theta1 = Theta1Rule::fixed(v.get<double>());
  } else {
    invalid("theta1.rule", "expected \"fixed\" or \"symmetric_half\"");
  }

  const auto& signs = member(doc, "signs", "");
  if (!signs.is_array() || static_cast<int>(signs.size()) != s.params.n - 1)
    invalid("signs", "expected N-1 = " + std::to_string(s.params.n - 1) + " entries");
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (!signs[i].is_number_integer() || (signs[i] != 1 && signs[i] != -1))
      invalid("signs[" + std::to_string(i + 1) + "]", "expected +1 or -1");
    s.signs.push_back(signs[i].get<int>());
  }

  if (doc.contains("fold_L")) {
    if (!doc["fold_L"].is_number_integer()) invalid("fold_L", "expected an integer");
    s.fold_L = doc["fold_L"].get<int>();
  }
  if (s.type == SuspensionType::III_OAE) {
    if (!s.fold_L || *s.fold_L <= 2 || *s.fold_L >= s.params.n - 2) invalid("fold_L", "III-OAE needs 2 < L < N-2");
  } else if (s.fold_L) {
    invalid("fold_L", "only III-OAE documents carry a fold index");
  }

  if (doc.contains("provenance")) {
    const auto& prov = doc["provenance"];
    if (!prov.is_object()) invalid("provenance", "expected an object");
    for (const auto& [k, v] : prov.items()) s.provenance[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return s;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ConstructedSuspension read_suspension(const std::filesystem::path& path) { return load_suspension(read_text(path)); }

void write_suspension(const std::filesystem::path& path, const ConstructedSuspension& s) {
  write_text(path, save_suspension(s));
}

std::string trace_csv(const DihedralTrace& t) {
  const int n = t.eps.empty() ? 0 : static_cast<int>(t.eps.front().size());
  std::string s = "# z, gap in input length units; volume in cubed units; angles in radians\nz,gap,volume";
  for (const char* name : {"eps", "delta", "Delta"})
    for (int k = 1; k <= n; ++k) s += "," + std::string(name) + "_" + std::to_string(k);
  s += ",feasible\n";
  for (int i = 0; i < t.samples(); ++i) {
    const bool ok = t.feasible[i];
    auto cell = [&](double x) { return ok ? number(x) : std::string(); };
    s += number(t.z[i]) + "," + cell(t.gap[i]) + "," + cell(t.volume[i]);
    for (const auto* family : {&t.eps, &t.delta, &t.Delta})
      for (int k = 0; k < n; ++k) s += "," + cell((*family)[i][k]);
    s += ok ? ",1\n" : ",0\n";
  }
  return s;
}

Mesh mesh_of(const Embedding& e) {
  Mesh m;
  m.vertices = e.points();
  const int n = e.n();
  for (int k = 0; k < n; ++k) m.faces.push_back({0, 2 + wrap(k + 1, n), 2 + k});
  for (int k = 0; k < n; ++k) m.faces.push_back({1, 2 + k, 2 + wrap(k + 1, n)});
  return m;
}

std::string obj_text(const Mesh& m) {
  std::string s;
  char buf[128];
  for (const auto& v : m.vertices) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    s += buf;
  }
  for (const auto& f : m.faces) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    s += buf;
  }
  return s;
}

Mesh parse_obj(const std::string& text) {
  Mesh m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": bad vertex");
      m.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (auto& idx : f) {
        std::string tok;
        if (!(ls >> tok)) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": bad face");
        idx = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      m.faces.push_back(f);
    }
  }
  return m;
}

std::vector<std::filesystem::path> export_mesh_frames(const ConstructedSuspension& s, int frames,
                                                      const std::filesystem::path& dir) {
  if (frames < 1) throw Error(ErrorKind::InvalidParams, "need at least one frame");
  std::filesystem::create_directories(dir);
  const auto iv = flexion_interval(s.params, s.theta1, s.signs);
  const auto zs = chebyshev_samples(iv, frames);
  const int width = std::max(3, static_cast<int>(std::to_string(frames - 1).size()));
  std::vector<std::filesystem::path> out;
  std::string manifest = "frame,file,z\n";
  for (int i = 0; i < frames; ++i) {
    std::string index = std::to_string(i);
    const std::string name = "frame_" + std::string(width - index.size(), '0') + index + ".obj";
    const auto path = dir / name;
    write_text(path, obj_text(mesh_of(embed(s.params, zs[i], s.theta1, s.signs))));
    manifest += std::to_string(i) + "," + name + "," + number(zs[i]) + "\n";
    out.push_back(path);
  }
  write_text(dir / "manifest.csv", manifest);
  return out;
}

}  // namespace flexsusp
