#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arm/pipeline.hpp"

namespace arm {

inline constexpr std::string_view kTraceVersion = "arm-trace/1";

nlohmann::json trace_record(std::string_view question_id, std::string_view question,
                            const RetrievalResult& result);

/// Problems with one record; empty when it conforms.
std::vector<std::string> validate_trace_record(const nlohmann::json& record);

/// Problems across a JSONL trace file, each prefixed with its line number.
std::vector<std::string> validate_trace_file(const std::filesystem::path& path);

void append_trace(const std::filesystem::path& path, const nlohmann::json& record);

}  // namespace arm
