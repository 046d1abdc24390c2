// SPDX-License-Identifier: MIT

/**
 * @file parse.hpp
 * @brief Circuit readers: an OpenQASM 2 subset and a JSON gate list.
 *
 * Only two-qubit interactions survive parsing. One-qubit gates, measurements,
 * barriers, resets and classical registers are dropped. Standard two-qubit
 * gates become CNOT interactions, `swap` stays a SWAP, and anything acting on
 * three or more qubits is rejected.
 */

#pragma once

#include "qapr/circuit.hpp"
#include "qapr/errors.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace qapr {

enum class CircuitFormat { Qasm2, JsonGateList };

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_args(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '(' || ch == '[') {
            ++depth;
        } else if (ch == ')' || ch == ']') {
            --depth;
        }
        if (ch == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) {
        out.push_back(trim(cur));
    }
    return out;
}

inline const std::unordered_set<std::string>& two_qubit_mnemonics() {
    static const std::unordered_set<std::string> names = {
        "cx", "CX", "cnot", "cz", "cy", "ch", "crx", "cry", "crz", "cp", "cphase", "cu1",
        "cu3", "cu", "csx", "rxx", "ryy", "rzz", "rzx", "ecr", "iswap", "dcx"};
    return names;
}

class QasmReader {
public:
    Circuit read(std::string_view text) {
        std::string stmt;
        std::size_t line = 1;
        std::size_t stmt_line = 0;
        int brace_depth = 0;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char ch = text[i];
            if (ch == '/' && i + 1 < text.size() && text[i + 1] == '/') {
                while (i < text.size() && text[i] != '\n') {
                    ++i;
                }
                if (i < text.size()) {
                    ++line;
                }
                stmt += ' ';
                continue;
            }
            if (ch == '\n') {
                ++line;
                stmt += ' ';
                continue;
            }
            if (stmt_line == 0 && !std::isspace(static_cast<unsigned char>(ch))) {
                stmt_line = line;
            }
            if (ch == '{') {
                ++brace_depth;
            } else if (ch == '}') {
                if (--brace_depth < 0) {
                    throw SyntaxError(line, "unbalanced '}'");
                }
                if (brace_depth == 0) {
                    // end of a gate/opaque definition body; its contents are not expanded
                    stmt.clear();
                    stmt_line = 0;
                }
                continue;
            }
            if (brace_depth > 0) {
                continue;
            }
            if (ch == ';') {
                statement(trim(stmt), stmt_line == 0 ? line : stmt_line);
                stmt.clear();
                stmt_line = 0;
                continue;
            }
            stmt += ch;
        }
        if (brace_depth != 0) {
            throw SyntaxError(line, "unterminated '{'");
        }
        if (!trim(stmt).empty()) {
            throw SyntaxError(stmt_line, "statement missing ';'");
        }
        if (!seen_qreg_) {
            throw SyntaxError(line, "no qreg declared");
        }
        Circuit c(n_qubits_);
        for (const auto& [g, ln] : pending_) {
            if (g.u >= n_qubits_ || g.v >= n_qubits_) {
                throw IndexError("line " + std::to_string(ln) + ": qubit index outside register");
            }
            c.add(g.u, g.v, g.kind);
        }
        return c;
    }

private:
    struct Reg {
        int offset;
        int size;
    };

    void statement(const std::string& s, std::size_t line) {
        if (s.empty()) {
            return;
        }
        std::size_t name_end = 0;
        while (name_end < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[name_end])) || s[name_end] == '_')) {
            ++name_end;
        }
        const std::string head = s.substr(0, name_end);
        if (head.empty()) {
            throw SyntaxError(line, "expected a statement, got '" + s + "'");
        }
        if (head == "OPENQASM" || head == "include" || head == "creg" || head == "barrier" ||
            head == "measure" || head == "reset" || head == "gate" || head == "opaque") {
            return;
        }
        if (head == "qreg") {
            declare(s.substr(name_end), line);
            return;
        }
        if (head == "if") {
            throw SyntaxError(line, "classically controlled operations are not supported");
        }
        std::string rest = s.substr(name_end);
        const std::string trimmed = trim(rest);
        std::string operands = trimmed;
        if (!trimmed.empty() && trimmed.front() == '(') {
            const std::size_t close = trimmed.find(')');
            if (close == std::string::npos) {
                throw SyntaxError(line, "unclosed parameter list");
            }
            operands = trimmed.substr(close + 1);
        }
        const auto args = split_args(operands);
        if (args.empty()) {
            throw SyntaxError(line, "gate '" + head + "' has no operands");
        }
        if (args.size() == 1) {
            resolve_any(args[0], line); // validates the operand, then drops the gate
            return;
        }
        if (args.size() > 2) {
            throw UnsupportedGate("line " + std::to_string(line) + ": gate '" + head + "' acts on " +
                                  std::to_string(args.size()) + " qubits");
        }
        GateKind kind = GateKind::CNOT;
        if (head == "swap") {
            kind = GateKind::SWAP;
        } else if (two_qubit_mnemonics().count(head) == 0) {
            throw UnsupportedGate("line " + std::to_string(line) + ": unknown two-qubit gate '" + head + "'");
        }
        const int u = resolve(args[0], line);
        const int v = resolve(args[1], line);
        if (u == v) {
            throw SyntaxError(line, "two-qubit gate with repeated operand");
        }
        pending_.push_back({Gate{u, v, kind}, line});
    }

    void declare(const std::string& decl, std::size_t line) {
        const std::string d = trim(decl);
        const std::size_t lb = d.find('[');
        const std::size_t rb = d.find(']');
        if (lb == std::string::npos || rb == std::string::npos || rb < lb) {
            throw SyntaxError(line, "malformed qreg declaration");
        }
        const std::string name = trim(d.substr(0, lb));
        const int size = parse_int(d.substr(lb + 1, rb - lb - 1), line);
        if (name.empty() || size <= 0 || !trim(d.substr(rb + 1)).empty()) {
            throw SyntaxError(line, "malformed qreg declaration");
        }
        if (regs_.count(name) != 0) {
            throw SyntaxError(line, "register '" + name + "' redeclared");
        }
        regs_[name] = Reg{n_qubits_, size};
        n_qubits_ += size;
        seen_qreg_ = true;
    }

    // One-qubit operands may name a whole register (broadcast).
    void resolve_any(const std::string& operand, std::size_t line) {
        if (operand.find('[') == std::string::npos) {
            if (regs_.count(trim(operand)) == 0) { // also catches "q r" style junk
                throw SyntaxError(line, "unknown register '" + operand + "'");
            }
            return;
        }
        resolve(operand, line);
    }

    int resolve(const std::string& operand, std::size_t line) {
        const std::size_t lb = operand.find('[');
        const std::size_t rb = operand.find(']');
        if (lb == std::string::npos || rb == std::string::npos || rb < lb ||
            !trim(operand.substr(rb + 1)).empty()) {
            throw SyntaxError(line, "expected indexed qubit operand, got '" + operand + "'");
        }
        const std::string name = trim(operand.substr(0, lb));
        if (name.find_first_of(" \t\r\n") != std::string::npos) {
            throw SyntaxError(line, "malformed operand '" + operand + "'");
        }
        const auto it = regs_.find(name);
        if (it == regs_.end()) {
            throw SyntaxError(line, "unknown register '" + name + "'");
        }
        const int idx = parse_int(operand.substr(lb + 1, rb - lb - 1), line);
        if (idx < 0 || idx >= it->second.size) {
            throw IndexError("line " + std::to_string(line) + ": " + name + "[" + std::to_string(idx) +
                             "] outside register of size " + std::to_string(it->second.size));
        }
        return it->second.offset + idx;
    }

    static int parse_int(const std::string& s, std::size_t line) {
        const std::string t = trim(s);
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos || t.size() > 9) {
            throw SyntaxError(line, "expected an integer, got '" + t + "'");
        }
        return std::stoi(t);
    }

    std::map<std::string, Reg> regs_;
    int n_qubits_ = 0;
    bool seen_qreg_ = false;
    std::vector<std::pair<Gate, std::size_t>> pending_;
};

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
        }
    }
    return line;
}

inline Circuit read_json_gatelist(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw SyntaxError(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    if (!doc.is_object() || !doc.contains("n") || !doc["n"].is_number_integer() ||
        !doc.contains("gates") || !doc["gates"].is_array()) {
        throw SyntaxError(1, R"(expected {"n": int, "gates": [[u,v], ...]})");
    }
    const auto n = doc["n"].get<long long>();
    if (n < 0 || n > 1'000'000) {
        throw SyntaxError(1, "invalid qubit count");
    }
    Circuit c(static_cast<int>(n));
    std::size_t k = 0;
    for (const auto& g : doc["gates"]) {
        if (!g.is_array()) {
            throw SyntaxError(1, "gate " + std::to_string(k) + " is not an array");
        }
        if (g.size() != 2) {
            if (g.size() > 2) {
                throw UnsupportedGate("gate " + std::to_string(k) + " acts on " + std::to_string(g.size()) +
                                      " qubits");
            }
            throw SyntaxError(1, "gate " + std::to_string(k) + " must list two qubits");
        }
        if (!g[0].is_number_integer() || !g[1].is_number_integer()) {
            throw SyntaxError(1, "gate " + std::to_string(k) + " has non-integer operands");
        }
        const auto u = g[0].get<long long>();
        const auto v = g[1].get<long long>();
        if (u < 0 || v < 0 || u >= n || v >= n) {
            throw IndexError("gate " + std::to_string(k) + " references a qubit outside 0.." +
                             std::to_string(n - 1));
        }
        if (u == v) {
            throw SyntaxError(1, "gate " + std::to_string(k) + " repeats a qubit");
        }
        c.add(static_cast<int>(u), static_cast<int>(v));
        ++k;
    }
    return c;
}

} // namespace detail

[[nodiscard]] inline Circuit parse_circuit(std::string_view source, CircuitFormat format) {
    if (format == CircuitFormat::JsonGateList) {
        return detail::read_json_gatelist(source);
    }
    return detail::QasmReader{}.read(source);
}

/// Format chosen by extension: `.json` is a gate list, anything else is QASM.
[[nodiscard]] inline CircuitFormat format_for_path(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot != std::string::npos && path.substr(dot) == ".json") {
        return CircuitFormat::JsonGateList;
    }
    return CircuitFormat::Qasm2;
}

[[nodiscard]] inline Circuit load_circuit(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IOError("cannot open circuit file " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_circuit(ss.str(), format_for_path(path));
}

[[nodiscard]] inline std::string to_json_gatelist(const Circuit& c) {
    nlohmann::json gates = nlohmann::json::array();
    for (const Gate& g : c.gates()) {
        gates.push_back({g.u, g.v});
    }
    return nlohmann::json{{"n", c.n_qubits()}, {"gates", gates}}.dump();
}

} // namespace qapr
