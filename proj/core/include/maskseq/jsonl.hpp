#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace maskseq {

/// Calls fn(value, line_number) for every non-blank line (1-based numbers).
/// Throws Error(kIo) when the file cannot be opened and ParseError (line
/// form) for malformed JSON.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// Whole-file JSON document.
nlohmann::json read_json_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

/// Writes `text` to `path`, or to stdout when the path is empty or "-".
void write_text_output(const std::filesystem::path& path, const std::string& text);

}  // namespace maskseq
