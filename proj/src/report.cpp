#include "mtds/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mtds/errors.hpp"

namespace mtds {

namespace {

void emit_string(std::ostream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
        switch (c) {
            case '"': os << "\\\""; break;
            case '\\': os << "\\\\"; break;
            case '\n': os << "\\n"; break;
            case '\t': os << "\\t"; break;
            case '\r': os << "\\r"; break;
            default:
                if ((unsigned char)c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    os << buf;
                } else {
                    os << c;
                }
        }
    }
    os << '"';
}

void emit_number(std::ostream& os, double v) {
    if (!std::isfinite(v)) {
        os << (std::isnan(v) ? "null" : (v > 0 ? "1e999" : "-1e999"));
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
    // bare integers like "3" stay valid JSON numbers either way
}

void indent_to(std::ostream& os, int depth) {
    for (int i = 0; i < depth; ++i) os << "  ";
}

} // namespace

void emit_json(std::ostream& os, const nlohmann::ordered_json& j, int depth) {
    using J = nlohmann::ordered_json;
    switch (j.type()) {
        case J::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                indent_to(os, depth + 1);
                emit_string(os, it.key());
                os << ": ";
                emit_json(os, it.value(), depth + 1);
                if (i + 1 < j.size()) os << ",";
                os << "\n";
            }
            indent_to(os, depth);
            os << "}";
            return;
        }
        case J::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[";
            for (size_t i = 0; i < j.size(); ++i) {
                emit_json(os, j[i], depth);
                if (i + 1 < j.size()) os << ", ";
            }
            os << "]";
            return;
        }
        case J::value_t::string:
            emit_string(os, j.get_ref<const std::string&>());
            return;
        case J::value_t::boolean:
            os << (j.get<bool>() ? "true" : "false");
            return;
        case J::value_t::number_integer:
            os << j.get<long long>();
            return;
        case J::value_t::number_unsigned:
            os << j.get<unsigned long long>();
            return;
        case J::value_t::number_float:
            emit_number(os, j.get<double>());
            return;
        case J::value_t::null:
        default:
            os << "null";
            return;
    }
}

std::string json_to_string(const nlohmann::ordered_json& j) {
    std::ostringstream ss;
    emit_json(ss, j, 0);
    ss << "\n";
    return ss.str();
}

nlohmann::ordered_json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrKind::config, "cannot open file: " + path);
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const std::exception& e) {
        fail(ErrKind::config, "bad JSON in " + path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrKind::config, "cannot write file: " + path);
    out << json_to_string(j);
}

} // namespace mtds
