#pragma once

#include <filesystem>
#include <string>

#include "dab/circuit_params.hpp"

namespace dab {

/// Loads and invariant-checks a CircuitParams config (JSON). Coss curves may
/// be inline [v, C] pair lists or a {"csv": path} reference relative to the
/// config file. Unspecified per-harmonic resistances default to the k = 1
/// value; omitted Td defaults to 0 (ideal transitions).
CircuitParams load_config(const std::filesystem::path& path);

CircuitParams parse_config(const std::string& json_text,
                           const std::filesystem::path& base_dir = {});

/// Serializes back to the same schema; load(save(p)) is identity field-wise.
std::string serialize_config(const CircuitParams& params);
void save_config(const CircuitParams& params, const std::filesystem::path& path);

/// FNV-1a hash of a file's bytes, hex string. Embedded in run manifests.
std::string file_hash(const std::filesystem::path& path);

/// Nominal hardware parameter set (Table-style values) used by tests and as
/// a starting point for generated configs.
CircuitParams nominal_params();

}  // namespace dab
