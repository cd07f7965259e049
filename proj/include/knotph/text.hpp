#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace knotph::text {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split_ws(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> lines(std::string_view s);

std::optional<double> to_double(std::string_view s) noexcept;
std::optional<long long> to_int(std::string_view s) noexcept;

/// printf("%.*g") formatting; 17 digits round-trips every double.
std::string format_double(double v, int significant_digits = 17);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace knotph::text
