#pragma once

#include "rumdp/model.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace rumdp {

/// Syntax error in a model file, with 1-based position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/**
 * Parses the textual model format:
 *
 *     params: theta1 in [0,1], theta2 in [0,1];
 *     constraint theta1 + theta2 <= 1;        # optional
 *     actions: a, b;                          # optional, fixes action order
 *     init s0;                                # optional, default first state
 *     target s2;                              # optional
 *     state s0 { action a { -> s1 : 0.3*theta1; -> s2 : 1 - 0.3*theta1; } }
 *     reward s0 a = 5/2;
 *
 * Semantic problems are reported as ModelError.
 */
Pmdp parse_model(std::string_view text);

/// Inverse of parse_model up to whitespace and comments.
std::string render_model(const Pmdp& m);

/// Parses a single expression over the given parameter names.
Polynomial parse_expression(std::string_view text, const std::vector<std::string>& names);

Pmdp load_model(const std::string& path);
void save_model(const Pmdp& m, const std::string& path);

} // namespace rumdp
