#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedkgc {

// Error taxonomy maps onto the CLI exit codes:
//   ConfigError -> 1, DataError -> 2, TrainError / anything else -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class TrainError : public Error {
 public:
  using Error::Error;
};

// Ingestion failure with the offending file and line attached.
class LoadError : public DataError {
 public:
  enum class Kind {
    missing_file,
    malformed_line,
    id_out_of_range,
    non_contiguous_id,
    duplicate_triple,
    empty_split,
  };

  LoadError(Kind kind, std::string file, std::size_t line, const std::string& what)
      : DataError(file + (line ? ":" + std::to_string(line) : "") + ": " + what),
        kind_(kind),
        file_(std::move(file)),
        line_(line) {}

  Kind kind() const { return kind_; }
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }  // 1-based; 0 = whole file

 private:
  Kind kind_;
  std::string file_;
  std::size_t line_;
};

}  // namespace fedkgc
