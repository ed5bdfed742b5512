#include "atombench/fetch.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <mutex>

#include <curl/curl.h>
#include <fmt/format.h>
#include <openssl/evp.h>
#include <zlib.h>
#include <json.hpp>

#include "atombench/atomic_file.hpp"
#include "atombench/error.hpp"

namespace fs = std::filesystem;

namespace atombench {
namespace {

using json = nlohmann::json;

class CacheLock {
 public:
  explicit CacheLock(const fs::path& dir) {
    const auto path = (dir / ".lock").string();
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw IoError(fmt::format("cannot open cache lock '{}'", path));
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw IoError(fmt::format("cannot lock '{}'", path));
    }
  }
  ~CacheLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  CacheLock(const CacheLock&) = delete;
  CacheLock& operator=(const CacheLock&) = delete;

 private:
  int fd_ = -1;
};

void quarantine(const fs::path& file) {
  for (int k = 1;; ++k) {
    fs::path target = file;
    target += fmt::format(".quarantine.{}", k);
    if (!fs::exists(target)) {
      fs::rename(file, target);
      return;
    }
  }
}

std::uint32_t le32(std::string_view b, std::size_t at) {
  if (at + 4 > b.size()) throw UnsupportedFormat("truncated zip archive");
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}
std::uint16_t le16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) throw UnsupportedFormat("truncated zip archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

std::string inflate_raw(std::string_view in, std::size_t out_size) {
  std::string out(out_size, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw IoError("zlib init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != out_size)
    throw UnsupportedFormat("corrupt deflate stream in zip archive");
  return out;
}

bool is_zip(std::string_view bytes) { return bytes.substr(0, 4) == std::string_view("PK\3\4", 4); }

std::once_flag curl_once;

std::size_t curl_sink(char* ptr, std::size_t size, std::size_t n, void* user) {
  static_cast<std::string*>(user)->append(ptr, size * n);
  return size * n;
}

}  // namespace

DatasetManifest validated(DatasetManifest m) {
  std::transform(m.sha256.begin(), m.sha256.end(), m.sha256.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  const bool hex = m.sha256.size() == 64 &&
                   std::all_of(m.sha256.begin(), m.sha256.end(),
                               [](unsigned char ch) { return std::isxdigit(ch); });
  if (!hex) throw InvalidArgument(fmt::format("manifest '{}': sha256 must be 64 hex chars", m.name));
  if (m.record_count <= 0)
    throw InvalidArgument(fmt::format("manifest '{}': record_count must be positive", m.name));
  if (m.source_url.empty())
    throw InvalidArgument(fmt::format("manifest '{}': empty source_url", m.name));
  return m;
}

std::vector<DatasetManifest> load_manifests(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!doc.is_array()) throw SchemaError(fmt::format("{}: expected a JSON array", path.string()));
  std::vector<DatasetManifest> out;
  try {
    for (const auto& m : doc)
      out.push_back(validated({m.at("name").get<std::string>(),
                               m.at("source_url").get<std::string>(),
                               m.at("sha256").get<std::string>(),
                               m.at("record_count").get<std::int64_t>()}));
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 computation failed");
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string extract_zip_json(std::string_view z) {
  // End of central directory: scan backwards over a possible comment.
  if (z.size() < 22) throw UnsupportedFormat("truncated zip archive");
  std::size_t eocd = std::string_view::npos;
  for (std::size_t i = z.size() - 22 + 1; i-- > 0 && z.size() - i <= 22 + 65535;)
    if (le32(z, i) == 0x06054b50) {
      eocd = i;
      break;
    }
  if (eocd == std::string_view::npos) throw UnsupportedFormat("zip central directory not found");
  const std::uint16_t entries = le16(z, eocd + 10);
  const std::uint32_t cd_offset = le32(z, eocd + 16);
  if (cd_offset == 0xffffffffu || entries == 0xffff) throw UnsupportedFormat("zip64 archives are not supported");

  struct Member {
    std::string name;
    std::uint16_t method;
    std::uint32_t csize, usize, local;
  };
  std::vector<Member> members;
  std::size_t at = cd_offset;
  for (std::uint16_t e = 0; e < entries; ++e) {
    if (le32(z, at) != 0x02014b50) throw UnsupportedFormat("bad zip central directory entry");
    const std::uint16_t nlen = le16(z, at + 28), xlen = le16(z, at + 30), clen = le16(z, at + 32);
    if (at + 46 + nlen > z.size()) throw UnsupportedFormat("truncated zip archive");
    members.push_back({std::string(z.substr(at + 46, nlen)), le16(z, at + 10), le32(z, at + 20),
                       le32(z, at + 24), le32(z, at + 42)});
    at += 46u + nlen + xlen + clen;
  }
  auto pick = std::find_if(members.begin(), members.end(), [](const Member& m) {
    return m.name.size() >= 5 && m.name.compare(m.name.size() - 5, 5, ".json") == 0;
  });
  if (pick == members.end()) {
    if (members.size() != 1) throw UnsupportedFormat("zip archive holds no .json member");
    pick = members.begin();
  }
  const std::size_t data = pick->local + 30u + le16(z, pick->local + 26) + le16(z, pick->local + 28);
  if (data + pick->csize > z.size()) throw UnsupportedFormat("truncated zip archive");
  const auto payload = z.substr(data, pick->csize);
  if (pick->method == 0) return std::string(payload);
  if (pick->method == 8) return inflate_raw(payload, pick->usize);
  throw UnsupportedFormat(fmt::format("zip compression method {} not supported", pick->method));
}

std::string http_get(const std::string& url) {
  std::call_once(curl_once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  CURL* h = curl_easy_init();
  if (!h) throw NetworkError(fmt::format("{}: cannot initialise libcurl", url));
  std::string body;
  char errbuf[CURL_ERROR_SIZE] = {0};
  curl_easy_setopt(h, CURLOPT_URL, url.c_str());
  curl_easy_setopt(h, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(h, CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(h, CURLOPT_CONNECTTIMEOUT, 30L);
  curl_easy_setopt(h, CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(h, CURLOPT_USERAGENT, "atombench/0.1");
  curl_easy_setopt(h, CURLOPT_WRITEFUNCTION, curl_sink);
  curl_easy_setopt(h, CURLOPT_WRITEDATA, &body);
  curl_easy_setopt(h, CURLOPT_ERRORBUFFER, errbuf);
  const CURLcode rc = curl_easy_perform(h);
  curl_easy_cleanup(h);
  if (rc != CURLE_OK)
    throw NetworkError(fmt::format("{}: {}", url, errbuf[0] ? errbuf : curl_easy_strerror(rc)));
  return body;
}

fs::path fetch_dataset(const DatasetManifest& manifest_in, const fs::path& cache_dir) {
  const DatasetManifest manifest = validated(manifest_in);
  std::error_code ec;
  fs::create_directories(cache_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create cache dir '{}': {}", cache_dir.string(), ec.message()));

  CacheLock lock(cache_dir);
  const fs::path payload = cache_dir / (manifest.sha256 + ".json");
  const fs::path meta = cache_dir / (manifest.sha256 + ".meta");

  if (fs::exists(payload)) {
    std::string expected;
    if (fs::exists(meta)) {
      try {
        expected = json::parse(read_file(meta)).at("payload_sha256").get<std::string>();
      } catch (const json::exception&) {
      }
    }
    if (!expected.empty() && sha256_hex(read_file(payload)) == expected) return payload;
    quarantine(payload);
    fs::remove(meta, ec);
  }

  const std::string bytes = http_get(manifest.source_url);
  const std::string digest = sha256_hex(bytes);
  if (digest != manifest.sha256) {
    fs::path bad = cache_dir / (manifest.sha256 + ".download");
    write_file_atomic(bad, bytes);
    quarantine(bad);
    throw ChecksumMismatch(fmt::format("{}: expected sha256 {}, got {}", manifest.source_url,
                                       manifest.sha256, digest));
  }
  const std::string body = is_zip(bytes) ? extract_zip_json(bytes) : bytes;
  write_file_atomic(payload, body);
  const json m{{"name", manifest.name},
               {"url", manifest.source_url},
               {"sha256", manifest.sha256},
               {"payload_sha256", sha256_hex(body)},
               {"bytes", bytes.size()},
               {"record_count", manifest.record_count}};
  write_file_atomic(meta, m.dump(1) + "\n");
  return payload;
}

}  // namespace atombench
