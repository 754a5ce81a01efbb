#include "spreadlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace spreadlab {

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_path_csv(const BidAskPath& path, std::ostream& out) {
    const bool with_s = path.price_system.has_value();
    out << (with_s ? "t,bid,ask,S\n" : "t,bid,ask\n");
    for (std::size_t k = 0; k < path.size(); ++k) {
        out << format_double(path.time_of(k)) << ',' << format_double(path.bid[k]) << ','
            << format_double(path.ask[k]);
        if (with_s) out << ',' << format_double((*path.price_system)[k]);
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

}  // namespace

BidAskPath read_path_csv(std::istream& in, double zero_eps) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("path csv: empty input");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "t" || header[1] != "bid" || header[2] != "ask")
        throw std::runtime_error("path csv: expected header t,bid,ask[,S]");
    const bool with_s = header.size() >= 4 && header[3] == "S";

    BidAskPath path;
    std::vector<double> s;
    double last_t = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() < (with_s ? 4u : 3u)) throw std::runtime_error("path csv: short row");
        last_t = std::stod(fields[0]);
        path.bid.push_back(std::stod(fields[1]));
        path.ask.push_back(std::stod(fields[2]));
        if (with_s) s.push_back(std::stod(fields[3]));
    }
    if (path.bid.size() < 2) throw std::runtime_error("path csv: need at least two rows");
    path.horizon = last_t;
    if (with_s) path.price_system = std::move(s);
    if (zero_eps > 0.0) {
        for (std::size_t k = 0; k < path.size(); ++k) {
            if (path.ask[k] - path.bid[k] <= zero_eps) {
                const double mid = 0.5 * (path.ask[k] + path.bid[k]);
                path.bid[k] = mid;
                path.ask[k] = mid;
                if (path.price_system) (*path.price_system)[k] = mid;
            }
        }
    }
    return path;
}

void write_strategy_csv(const StrategyPath& phi, const BidAskPath& path, std::ostream& out) {
    out << "t,phi\n";
    for (std::size_t k = 0; k < phi.values.size(); ++k)
        out << format_double(path.time_of(k)) << ',' << format_double(phi.values[k]) << '\n';
}

StrategyPath read_strategy_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("strategy csv: empty input");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "t" || header[1] != "phi")
        throw std::runtime_error("strategy csv: expected header t,phi");
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() < 2) throw std::runtime_error("strategy csv: short row");
        values.push_back(std::stod(fields[1]));
    }
    if (values.size() < 2) throw std::runtime_error("strategy csv: need at least two rows");
    return make_strategy(std::move(values));
}

std::string almost_simple_to_json(const AlmostSimpleStrategy& phi, const BidAskPath& path) {
    nlohmann::json doc;
    nlohmann::json jumps = nlohmann::json::array();
    for (const AsJump& j : phi.jumps)
        jumps.push_back({{"k", j.time}, {"t", path.time_of(j.time)}, {"at", j.at}, {"after", j.after}});
    doc["jumps"] = jumps;
    return doc.dump(2);
}

AlmostSimpleStrategy almost_simple_from_json(const std::string& text, const BidAskPath& path) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    AlmostSimpleStrategy phi;
    for (const nlohmann::json& j : doc.at("jumps")) {
        AsJump jump;
        if (j.contains("k")) {
            jump.time = j.at("k").get<std::size_t>();
        } else {
            const double t = j.at("t").get<double>();
            jump.time = static_cast<std::size_t>(
                std::llround(t / path.horizon * static_cast<double>(path.steps())));
        }
        jump.at = j.at("at").get<double>();
        jump.after = j.at("after").get<double>();
        phi.jumps.push_back(jump);
    }
    phi.validate(path.size());
    return phi;
}

std::string cost_report_json(const CostProcess& cost, const BidAskPath& path) {
    nlohmann::json doc;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < cost.values.size(); ++k) {
        nlohmann::json row;
        row["t"] = path.time_of(k);
        if (cost.values[k].infinite)
            row["value"] = "inf";
        else
            row["value"] = cost.values[k].value;
        row["left_jump"] = cost.left_jump[k];
        row["right_jump"] = cost.right_jump[k];
        rows.push_back(row);
    }
    doc["C"] = rows;
    doc["level_n_star"] = cost.level_n_star;
    return doc.dump(2);
}

std::string read_text_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& file, const std::string& text) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file);
    out << text;
}

}  // namespace spreadlab
