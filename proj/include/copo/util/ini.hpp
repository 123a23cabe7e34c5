#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace copo {

// Error raised by the text-format parsers; carries the source name and line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, int line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct IniEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct IniSection {
    std::string name;  // empty for the leading key-value block
    int line = 0;
    std::vector<IniEntry> entries;

    const IniEntry* find(const std::string& key) const {
        for (const auto& e : entries) {
            if (e.key == key) return &e;
        }
        return nullptr;
    }
};

// Sectioned key-value text: '#' comments, 'key = value' lines, repeated
// '[section]' headers. Used for both scene files and run configs.
struct IniFile {
    std::vector<IniSection> sections;  // sections[0] is the headerless block

    static IniFile parse(const std::string& text, const std::string& source_name);
    static IniFile parse_file(const std::string& path);

    std::string serialize() const;
};

}  // namespace copo
