#include "output.hpp"

#include <charconv>
#include <fstream>

namespace nfqed_cli {

std::string num(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

namespace {

std::string field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

void line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += field(cells[i]);
    }
    out += "\r\n";
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw std::logic_error("CSV row width does not match the header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::string out;
    line(out, header_);
    for (const auto& r : rows_) line(out, r);
    return out;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path().empty() ? "." : file.parent_path(), ec);
    if (ec) throw IoError("cannot create " + file.parent_path().string() + ": " + ec.message());
    const std::filesystem::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out.flush()) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, file, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void write_result(const std::filesystem::path& dir, const std::string& name, const std::string& csv,
                  const nlohmann::json& meta) {
    write_text(dir / (name + ".csv"), csv);
    write_text(dir / (name + ".meta.json"), meta.dump(2) + "\n");
}

}  // namespace nfqed_cli
