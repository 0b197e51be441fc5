#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "aopbip/composition.hpp"
#include "aopbip/model.hpp"

namespace aopbip {

struct SourceSpan {
    std::string file;
    std::size_t line = 0;
    std::size_t column = 0;
    std::size_t end_column = 0;
};

std::string to_string(const SourceSpan& s);

class ParseError : public std::runtime_error {
public:
    ParseError(SourceSpan span, const std::string& message);
    const SourceSpan& span() const { return span_; }
    const std::string& message() const { return message_; }

private:
    SourceSpan span_;
    std::string message_;
};

struct ParsedModel {
    CompositeComponent model;
    // Keyed like Diagnostic::where: instance, `instance.transition`, interaction, `low < high`.
    std::map<std::string, SourceSpan> spans;
};

// Syntax only; run validate() on the result.
ParsedModel parse_model(const std::string& text, const std::string& file = "<input>");

// Names in pointcuts and advice are resolved against `base`.
AspectFile parse_aspects(const std::string& text, const CompositeComponent& base, const std::string& file = "<input>");

std::string render_model(const CompositeComponent& c);
std::string render_dot(const CompositeComponent& c);

}  // namespace aopbip
