#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "transmod/forest.hpp"

namespace transmod {

using Json = nlohmann::ordered_json;

// Provenance header embedded in every output artifact. Two runs with equal
// manifests produce byte-identical outputs; the timestamp honors
// SOURCE_DATE_EPOCH so reruns can be made reproducible.
struct RunManifest {
  std::string command;
  std::string formula;
  std::string data_path;
  std::string data_hash;  // 64-bit FNV-1a of the input file, hex
  Json options = Json::object();
  std::uint64_t seed = 1;
  std::string version = "0.1.0";
  std::string timestamp;
};

RunManifest make_manifest(const std::string& command, const std::string& formula,
                          const std::string& data_path, Json options,
                          std::uint64_t seed);

Json manifest_json(const RunManifest& m);
// Compact one-line form for the "# ..." comment row of CSV outputs.
std::string manifest_comment(const RunManifest& m);

// 64-bit FNV-1a over the raw bytes of a file; throws DataError if unreadable.
std::uint64_t hash_file(const std::string& path);

// Current time as ISO-8601 UTC; SOURCE_DATE_EPOCH overrides the clock.
std::string iso8601_timestamp();

Json model_json(const FittedModel& fm);
Json tree_json(const Tree& t);
Json forest_json(const TransformationForest& f);

// Payload wrapped as {"manifest": ..., <payload fields>}, pretty-printed,
// trailing newline.
void write_json_file(const Json& payload, const RunManifest& m,
                     const std::string& path);

}  // namespace transmod
