#pragma once
// Download-and-cache for named benchmark files. Cache layout is
// <dir>/<name>.pomdp with a <name>.sha256 sidecar; writes go through a
// temporary file and an atomic rename so concurrent fetchers are safe.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>
#include <openssl/evp.h>

#include "pomdpml/model.hpp"

namespace pomdpml {

struct NotFound : Error {
    using Error::Error;
};
struct ChecksumMismatch : Error {
    using Error::Error;
};
struct NetworkUnavailable : Error {
    using Error::Error;
};

struct FetchOptions {
    std::string base_url = "http://www.pomdp.org/examples/";
    // candidate file suffixes tried in order on the server
    std::vector<std::string> suffixes = {".pomdp", ".POMDP", ".95.POMDP", ".aaai.POMDP"};
    int timeout_seconds = 10;
};

namespace detail {

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void atomic_write(const std::filesystem::path& target, const std::string& data) {
    namespace fs = std::filesystem;
    fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << data;
    }
    fs::rename(tmp, target);
}

}  // namespace detail

/// Cache directory: $POMDP_CACHE_DIR, else ~/.cache/pomdpml.
inline std::filesystem::path default_cache_dir() {
    if (const char* env = std::getenv("POMDP_CACHE_DIR")) return env;
    if (const char* home = std::getenv("HOME"))
        return std::filesystem::path(home) / ".cache" / "pomdpml";
    return std::filesystem::path(".") / "pomdp_cache";
}

/**
 * Returns the cached path for `name`, downloading it on a miss. A present
 * sidecar must match the file's SHA-256 (ChecksumMismatch otherwise); a
 * missing sidecar is rebuilt. Misses try `<base_url><name><suffix>` for each
 * candidate suffix: HTTP 404 everywhere raises NotFound, transport failure
 * raises NetworkUnavailable with the path to populate manually.
 */
inline std::filesystem::path fetch_and_cache(const std::string& name,
                                             const std::filesystem::path& cache_dir,
                                             const FetchOptions& options = {}) {
    namespace fs = std::filesystem;
    const fs::path file = cache_dir / (name + ".pomdp");
    const fs::path sidecar = cache_dir / (name + ".sha256");

    if (fs::exists(file)) {
        const std::string data = detail::read_file(file);
        const std::string digest = detail::sha256_hex(data);
        if (fs::exists(sidecar)) {
            std::string recorded = detail::read_file(sidecar);
            while (!recorded.empty() && (recorded.back() == '\n' || recorded.back() == '\r'))
                recorded.pop_back();
            if (recorded != digest)
                throw ChecksumMismatch("cache entry " + file.string() + " does not match its sidecar");
        } else {
            detail::atomic_write(sidecar, digest + "\n");
        }
        return file;
    }

    // split base_url into host part and path prefix
    std::string url = options.base_url;
    std::string prefix = "/";
    const auto scheme_end = url.find("://");
    if (scheme_end != std::string::npos) {
        const auto path_start = url.find('/', scheme_end + 3);
        if (path_start != std::string::npos) {
            prefix = url.substr(path_start);
            url = url.substr(0, path_start);
        }
    }
    if (prefix.empty() || prefix.back() != '/') prefix += '/';

    httplib::Client client(url);
    client.set_connection_timeout(options.timeout_seconds);
    client.set_read_timeout(options.timeout_seconds);
    client.set_follow_location(true);

    bool transport_ok = false;
    for (const auto& suffix : options.suffixes) {
        auto res = client.Get(prefix + name + suffix);
        if (!res) continue;
        transport_ok = true;
        if (res->status == 200) {
            detail::atomic_write(file, res->body);
            detail::atomic_write(sidecar, detail::sha256_hex(res->body) + "\n");
            return file;
        }
    }
    if (transport_ok)
        throw NotFound("no file for '" + name + "' at " + options.base_url);
    throw NetworkUnavailable("could not reach " + options.base_url + "; place the file at " +
                             file.string() + " to populate the cache manually");
}

}  // namespace pomdpml
