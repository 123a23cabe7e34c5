#include "copo/util/ini.hpp"

#include <fstream>
#include <sstream>

namespace copo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

IniFile IniFile::parse(const std::string& text, const std::string& source_name) {
    IniFile out;
    out.sections.push_back(IniSection{});  // headerless block
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError(source_name, lineno, "unterminated section header");
            }
            IniSection sec;
            sec.name = trim(line.substr(1, line.size() - 2));
            sec.line = lineno;
            if (sec.name.empty()) {
                throw ParseError(source_name, lineno, "empty section name");
            }
            out.sections.push_back(std::move(sec));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(source_name, lineno, "expected 'key = value', got '" + line + "'");
        }
        IniEntry entry;
        entry.key = trim(line.substr(0, eq));
        entry.value = trim(line.substr(eq + 1));
        entry.line = lineno;
        if (entry.key.empty()) {
            throw ParseError(source_name, lineno, "empty key");
        }
        out.sections.back().entries.push_back(std::move(entry));
    }
    return out;
}

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

std::string IniFile::serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& sec : sections) {
        if (!sec.name.empty()) {
            if (!first) out << "\n";
            out << "[" << sec.name << "]\n";
        }
        for (const auto& e : sec.entries) {
            out << e.key << " = " << e.value << "\n";
        }
        first = false;
    }
    return out.str();
}

}  // namespace copo
