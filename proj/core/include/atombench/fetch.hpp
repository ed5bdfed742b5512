#pragma once

// Download-and-cache for remote dataset archives.
//
// Cache layout, one entry per manifest digest:
//   <cache_dir>/<sha256>.json   payload (extracted when the download is a zip)
//   <sha256>.meta               JSON: url, sha256, payload_sha256, bytes
//   <sha256>.json.quarantine.N  entries that failed verification
// Writers serialise on an flock()ed <cache_dir>/.lock.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace atombench {

struct DatasetManifest {
  std::string name;
  std::string source_url;
  std::string sha256;  // of the downloaded bytes, lowercase hex
  std::int64_t record_count = 0;
};

// Throws InvalidArgument unless sha256 is 64 hex characters and
// record_count > 0. Upper-case hex digits are accepted and lower-cased.
DatasetManifest validated(DatasetManifest m);

// Reads a JSON array of {"name", "source_url", "sha256", "record_count"}.
std::vector<DatasetManifest> load_manifests(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

// Returns the cached payload path, downloading on a miss. A cache entry
// whose payload no longer matches its recorded digest is quarantined and
// downloaded again once. Throws NetworkError (message carries the URL),
// ChecksumMismatch when the downloaded bytes do not match the manifest,
// IoError.
std::filesystem::path fetch_dataset(const DatasetManifest& manifest,
                                    const std::filesystem::path& cache_dir);

// Extracts the first *.json member (or the only member) of a zip archive.
// Throws UnsupportedFormat for zip64 or unknown compression methods.
std::string extract_zip_json(std::string_view zip_bytes);

// GET url with redirects followed. Throws NetworkError.
std::string http_get(const std::string& url);

}  // namespace atombench
