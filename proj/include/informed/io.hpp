#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "informed/core.hpp"
#include "informed/samplers.hpp"

namespace informed {

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::string& path, const std::string& text);
/// mkdir -p; throws IoError on failure.
void ensure_directory(const std::string& path);

/// Git blob object id: SHA-1 over "blob <size>\0" followed by the content, in hex.
std::string git_blob_hash(std::span<const std::uint8_t> bytes);

/// Observation file: "INFOBS01", u64 width, height, channels, then row-major
/// channel-interleaved little-endian f64 values.
void write_observation(const std::string& path, const ImageGrid& image);
ImageGrid read_observation(const std::string& path);

/// Binary PGM (1 channel) or PPM (3 channels); values clamped to [0,1] and quantized
/// to 8 bits. For inspection only.
void write_preview(const std::string& path, const ImageGrid& image);

/// CSV with header iter,chain,accepted,logp,theta_0..theta_{D-1}; every real printed
/// with 17 significant digits so it parses back bit-exactly.
std::string format_trace_csv(const ChainSet& chains);
void write_trace_csv(const std::string& path, const ChainSet& chains);
ChainSet read_trace_csv(const std::string& path);

/// Shortest round-trip formatting of a double.
std::string format_real(double v);

}  // namespace informed
