#include "forestmap/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "forestmap/num_format.hpp"

namespace forestmap {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_number(const std::string& token, const std::filesystem::path& path, std::size_t line_no,
                    const std::string& column) {
    double v = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                 ": cannot parse number '" + token + "' in column " + column);
    }
    return v;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

} // namespace

PlotTable read_plots_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plot file '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    const auto header = split_line(strip_cr(line));

    const std::vector<std::string> reserved = {"id", "x", "y", "ba", "forest_type"};
    if (header.size() < reserved.size() + 1) {
        throw std::runtime_error(path.string() + ": header must be id,x,y,ba,forest_type plus at least one predictor");
    }
    for (std::size_t i = 0; i < reserved.size(); ++i) {
        if (header[i] != reserved[i]) {
            throw std::runtime_error(path.string() + ": header column " + std::to_string(i + 1) +
                                     " must be '" + reserved[i] + "', got '" + header[i] + "'");
        }
    }
    std::vector<std::string> schema(header.begin() + reserved.size(), header.end());

    PlotTable table(path.stem().string(), schema);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " columns, got " +
                                     std::to_string(fields.size()));
        }
        Plot p;
        p.id = fields[0];
        p.x = parse_number(fields[1], path, line_no, "x");
        p.y = parse_number(fields[2], path, line_no, "y");
        p.ba = parse_number(fields[3], path, line_no, "ba");
        try {
            p.forest_type = forest_type_from_string(fields[4]);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        p.features.reserve(schema.size());
        for (std::size_t j = 0; j < schema.size(); ++j) {
            p.features.push_back(parse_number(fields[5 + j], path, line_no, schema[j]));
        }
        try {
            table.add(std::move(p));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return table;
}

void write_plots_csv(const PlotTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write plot file '" + path.string() + "'");
    out << "id,x,y,ba,forest_type";
    for (const std::string& name : table.schema()) out << ',' << name;
    out << '\n';
    for (const Plot& p : table.plots()) {
        out << p.id << ',' << format_double_sig(p.x, 9) << ',' << format_double_sig(p.y, 9) << ','
            << format_double_sig(p.ba, 9) << ',' << to_string(p.forest_type);
        for (double v : p.features) out << ',' << format_double_sig(v, 9);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace forestmap
