#pragma once

#include <stdexcept>
#include <string>

namespace irspla {

// Every error carries a short machine-readable kind so the CLI can print a
// single structured line before exiting.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain", w) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error("shape", w) {}
};
struct SizeError : Error {
  explicit SizeError(const std::string& w) : Error("size", w) {}
};
struct IndexError : Error {
  explicit IndexError(const std::string& w) : Error("index", w) {}
};
struct ContractError : Error {
  explicit ContractError(const std::string& w) : Error("contract", w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config", w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io", w) {}
};

struct FormatError : Error {
  FormatError(const std::string& w, std::size_t offset)
      : Error("format", w + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

struct TrainingError : Error {
  TrainingError(const std::string& w, std::size_t epoch, std::size_t batch)
      : Error("training", w + " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ")"),
        epoch_(epoch),
        batch_(batch) {}
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

}  // namespace irspla
