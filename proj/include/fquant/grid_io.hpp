#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fquant/codebook.hpp"
#include "fquant/ensemble.hpp"
#include "fquant/kl_basis.hpp"
#include "fquant/scalar_quantizer.hpp"

namespace fquant {

struct GridIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ChecksumError : GridIoError {
  using GridIoError::GridIoError;
};
struct VersionError : GridIoError {
  using GridIoError::GridIoError;
};
struct InvariantError : GridIoError {
  std::string field;
  InvariantError(const std::string& f, const std::string& msg)
      : GridIoError("invariant violation in '" + f + "': " + msg), field(f) {}
};

// CRC-32 (reflected 0xEDB88320, zlib-compatible) over raw bytes.
std::uint32_t crc32(std::span<const unsigned char> bytes);

// Fully serialized run parameters; the digest is embedded in every output so
// a grid can be traced back to the exact invocation that produced it.
struct RunConfig {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t seed = 0;

  std::string digest() const;
};

void save_grid(const std::filesystem::path& path, const ScalarQuantizer& q,
               const std::string& config_digest = "");
void save_grid(const std::filesystem::path& path, const Codebook& cb,
               const std::string& config_digest = "");
void save_grid(const std::filesystem::path& path, const FunctionalQuantizer& fq,
               const std::string& config_digest = "");
void save_grid(const std::filesystem::path& path, const QuantizedPathEnsemble& e,
               const std::string& config_digest = "");

std::string grid_kind(const std::filesystem::path& path);
ScalarQuantizer load_scalar(const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);
FunctionalQuantizer load_functional(const std::filesystem::path& path);
QuantizedPathEnsemble load_ensemble(const std::filesystem::path& path);

// Store location: FQUANT_GRID_DIR env override, else ./grids.
std::filesystem::path grid_store_dir();

}  // namespace fquant
