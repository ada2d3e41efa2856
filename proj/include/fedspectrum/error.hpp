#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedspectrum {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FileNotFound : public Error {
 public:
  explicit FileNotFound(std::string path)
      : Error("file not found: " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column, std::size_t offset)
      : Error("parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
              " (byte " + std::to_string(offset) + "): " + what),
        line_(line),
        column_(column),
        offset_(offset) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_, column_, offset_;
};

/// Structural problem in an input document: missing key, wrong type, unknown key.
class SchemaError : public Error {
 public:
  SchemaError(std::string key, const std::string& reason)
      : Error("schema error at '" + key + "': " + reason), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UnknownSensor : public Error {
 public:
  explicit UnknownSensor(int id) : Error("unknown sensor id " + std::to_string(id)) {}
};

class EmptyData : public Error {
 public:
  EmptyData() : Error("training data is empty") {}
};

class EmptyUpdates : public Error {
 public:
  EmptyUpdates() : Error("no model updates to aggregate") {}
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class KindMismatch : public Error {
 public:
  KindMismatch() : Error("models of different kinds cannot be combined") {}
};

class NonpositiveDistance : public Error {
 public:
  explicit NonpositiveDistance(double d)
      : Error("inverse-distance weighting needs positive distances, got " + std::to_string(d)) {}
};

}  // namespace fedspectrum
