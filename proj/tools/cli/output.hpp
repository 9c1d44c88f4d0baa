#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace nfqed_cli {

/// Failure writing an output file. Exit code 1.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form, so equal doubles print identically.
std::string num(double v);

/// RFC 4180 table: CRLF line ends, fields quoted only when needed.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add(std::vector<std::string> row);
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Writes name.csv and name.meta.json into dir. Files are written to a
/// temporary name and renamed so readers never see partial output.
void write_result(const std::filesystem::path& dir, const std::string& name, const std::string& csv,
                  const nlohmann::json& meta);

void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace nfqed_cli
