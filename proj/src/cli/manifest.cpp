#include "mfldp/cli/manifest.hpp"

#include <cstdio>

#include <json.hpp>

#include "mfldp/errors.hpp"
#include "mfldp/io.hpp"

namespace mfldp::cli {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t hash_file(const std::filesystem::path& p) { return fnv1a64(io::read_text(p)); }

namespace {

json records(const std::vector<FileRecord>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back({{"path", r.path}, {"fnv1a64", r.hash}});
  return a;
}

std::vector<FileRecord> parse_records(const json& a) {
  std::vector<FileRecord> out;
  for (const auto& r : a) out.push_back({r.at("path").get<std::string>(), r.at("fnv1a64").get<std::string>()});
  return out;
}

}  // namespace

std::string to_json_text(const Manifest& m) {
  json j = {{"schema", io::schema_version},
            {"kind", "manifest"},
            {"command", m.command},
            {"config", m.config},
            {"config_fnv1a64", m.config_hash},
            {"seed", m.seed},
            {"threads", m.threads},
            {"version", m.version},
            {"compiler", m.compiler},
            {"inputs", records(m.inputs)},
            {"outputs", records(m.outputs)}};
  return j.dump(2) + "\n";
}

Manifest manifest_from_json_text(const std::string& text) {
  try {
    const auto j = json::parse(text);
    if (j.at("kind").get<std::string>() != "manifest") throw IoError("not a manifest");
    if (j.at("schema").get<int>() != io::schema_version) throw IoError("unsupported manifest schema");
    Manifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config").get<std::string>();
    m.config_hash = j.at("config_fnv1a64").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.threads = j.at("threads").get<int>();
    m.version = j.at("version").get<std::string>();
    m.compiler = j.at("compiler").get<std::string>();
    m.inputs = parse_records(j.at("inputs"));
    m.outputs = parse_records(j.at("outputs"));
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest: ") + e.what());
  }
}

}  // namespace mfldp::cli
