#pragma once

// Result cache: one versioned JSON document, records appended, never edited.
// Writers take an exclusive flock on "<path>.lock", re-read the file, append
// and atomically rename a temporary copy over it.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace mink {

using json = nlohmann::ordered_json;

inline constexpr int kCacheSchemaVersion = 1;

class cache_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Cache {
 public:
  explicit Cache(std::filesystem::path path) : path_(std::move(path)) {}

  const std::filesystem::path& path() const { return path_; }

  /// All records; an absent file is an empty cache.
  json records() const { return load()["records"]; }

  /// First record whose fields equal every field of key.
  std::optional<json> find(const json& key) const {
    for (const auto& rec : records()) {
      bool match = true;
      for (const auto& [name, value] : key.items()) {
        if (!rec.contains(name) || rec[name] != value) {
          match = false;
          break;
        }
      }
      if (match) return rec;
    }
    return std::nullopt;
  }

  void append(const json& record) const {
    Lock lock(path_.string() + ".lock");
    json doc = load();
    doc["records"].push_back(record);
    const auto tmp = path_.string() + ".tmp." + std::to_string(::getpid());
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw cache_error("cannot write cache file " + tmp);
      out << doc.dump(2) << '\n';
      if (!out.flush()) throw cache_error("cannot write cache file " + tmp);
    }
    std::filesystem::rename(tmp, path_);
  }

 private:
  struct Lock {
    explicit Lock(const std::string& file) {
      fd = ::open(file.c_str(), O_CREAT | O_RDWR, 0644);
      if (fd < 0 || ::flock(fd, LOCK_EX) != 0) throw cache_error("cannot lock " + file);
    }
    ~Lock() {
      ::flock(fd, LOCK_UN);
      ::close(fd);
    }
    Lock(const Lock&) = delete;
    Lock& operator=(const Lock&) = delete;
    int fd = -1;
  };

  json load() const {
    std::ifstream in(path_);
    if (!in) return json{{"schema_version", kCacheSchemaVersion}, {"records", json::array()}};
    std::stringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
      doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw cache_error("corrupt cache file " + path_.string() + ": " + e.what());
    }
    if (!doc.is_object() || doc.value("schema_version", 0) != kCacheSchemaVersion || !doc.contains("records"))
      throw cache_error("unsupported cache schema in " + path_.string());
    return doc;
  }

  std::filesystem::path path_;
};

}  // namespace mink
