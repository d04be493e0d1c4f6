#pragma once

#include <deque>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "nugget/core/error.hpp"
#include "nugget/judge/backend.hpp"

namespace nugget::testing {

// Replays canned replies in order and records every request it saw.
class ScriptedBackend : public judge::ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies) : replies_(replies.begin(), replies.end()) {}

  std::string complete(const judge::ChatRequest& request) override {
    std::lock_guard lock(mutex_);
    seen.push_back(request);
    if (replies_.empty()) throw Error(ErrorCode::JudgeUnavailable, "script exhausted");
    auto reply = replies_.front();
    replies_.pop_front();
    return reply;
  }
  std::string model_name() const override { return "scripted"; }

  std::vector<judge::ChatRequest> seen;

 private:
  std::mutex mutex_;
  std::deque<std::string> replies_;
};

inline std::string wrap(const std::string& payload) { return "<reasoning>r</reasoning>\n" + payload; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("nugget_unit_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a nugget::Error");
}

}  // namespace nugget::testing
