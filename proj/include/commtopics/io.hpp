#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace commtopics::io {

// Minimal RFC 4180 handling: quoted fields with doubled quotes.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_field(std::string_view value);

// Shortest representation that round-trips ("%.17g" fallback).
std::string format_double(double value);

std::ifstream open_input(const std::filesystem::path& path, const std::string& stage);
std::ofstream open_output(const std::filesystem::path& path, const std::string& stage);

// Reads a whole text file; throws DataError naming `stage` when missing.
std::string read_file(const std::filesystem::path& path, const std::string& stage);

// Strips a trailing '\r' and a leading UTF-8 byte order mark.
std::string_view trim_line(std::string_view line, bool first_line);

}  // namespace commtopics::io
