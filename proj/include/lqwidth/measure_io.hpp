#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lqwidth/measure.hpp"

namespace lqwidth {

/// Malformed JSON or a document that does not match the measure schema.
/// `field` is a JSON-pointer-like path to the offending value.
class MeasureParseError : public std::runtime_error {
 public:
  MeasureParseError(std::string field, const std::string& constraint);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parses without validating normalization or geometry.
MeasureSpec measure_from_json(const nlohmann::json& doc);
nlohmann::json measure_to_json(const MeasureSpec& spec);

/// Reads, parses and validates a measure-spec file. Throws MeasureParseError
/// or InvalidMeasure.
MeasureSpec parse_measure_spec(const std::filesystem::path& path);

}  // namespace lqwidth
