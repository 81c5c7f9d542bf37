#pragma once

#include "dockfix/ast.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dockfix {

struct FlagSchema {
    std::vector<std::string> names; // e.g. {"-y", "--yes", "--assume-yes"}
    std::string tag;
    bool takes_value = false;  // value in the following argument
    bool inline_value = false; // accepts --flag=value
    std::string value_tag;     // annotation for the value argument, if any
};

struct SubcommandSchema {
    std::vector<std::string> words; // e.g. {"cache", "clean"}
    std::string tag;
    std::vector<FlagSchema> flags;
    std::string positional_role;
};

struct CommandSchema {
    std::string command_name;
    std::string tag;
    std::vector<SubcommandSchema> subcommands;
    std::vector<FlagSchema> flags;
    std::string positional_role;
    bool wrapper = false;            // trailing args form an embedded command
    bool bundled_short_flags = false; // -fsSL style decomposition
    bool old_style_bundle = false;    // tar zxf style first argument
    bool match_by_basename = false;   // ./configure, /src/configure
    std::string bare_subcommand_tag;  // applied when no subcommand word at all
};

struct EnrichmentStats {
    std::size_t total_commands = 0;
    std::size_t annotated_commands = 0;

    double coverage_ratio() const {
        return total_commands == 0
                   ? 1.0
                   : static_cast<double>(annotated_commands) /
                         static_cast<double>(total_commands);
    }
};

/// Full text of a word when it is composed purely of literal characters
/// (quotes allowed, their content included); nullopt when any variable,
/// substitution or opaque part appears.
std::optional<std::string> literalWordText(const AstNode& word);

/// Annotates BashCommand nodes with structural tags from per-command
/// schemas. Schema tables are immutable during enrichment; the same
/// Enricher can serve many trees.
class Enricher {
  public:
    /// Role of one argument word within a recognized command line.
    enum class WordRole { Name, WrapperFlag, Subcommand, Flag, FlagValue, Positional, Unknown };

    struct WordInfo {
        AstNode* word = nullptr;
        WordRole role = WordRole::Unknown;
        const FlagSchema* flag = nullptr; // for Flag / FlagValue
        std::vector<const FlagSchema*> bundled; // decomposed short flags
    };

    /// Structural analysis of one command against the schema tables.
    struct Shape {
        AstNode* command = nullptr;
        const CommandSchema* schema = nullptr;      // effective (inner) schema
        const SubcommandSchema* subcommand = nullptr;
        std::vector<const CommandSchema*> chain;    // wrappers outermost first
        bool wrapped = false;                       // reached through a wrapper
        std::vector<WordInfo> words;                // name + args, doc order
        std::size_t name_word_index = 0;            // effective command name
        std::size_t last_subcommand_word_index = 0; // == name index when none

        std::vector<AstNode*> positionals() const;
        AstNode* valueOfFlagTag(const std::string& flag_tag) const;
    };

    Enricher();

    void addSchema(CommandSchema schema);
    const std::vector<CommandSchema>& schemas() const { return schemas_; }

    /// Loads additional schemas from a JSON file; returns false and sets
    /// `error` on malformed input.
    bool loadSchemaFile(const std::string& path, std::string& error);

    /// Every tag the schema set can produce, plus positional roles.
    std::set<std::string> vocabulary() const;

    /// Clears prior annotations and re-annotates the whole tree.
    EnrichmentStats enrich(AstNode& root) const;

    /// Applies embedded-command enrichment for one wrapper command.
    /// Returns the node that carries the embedded command's annotations
    /// (the command node for sudo, the script argument for sh -c), or
    /// nullptr when the command is not a wrapper or has no embedded command.
    AstNode* enrichEmbedded(AstNode& command) const;

    /// Structural shape of a command line; nullopt when the command name is
    /// not literal or matches no schema.
    std::optional<Shape> shape(AstNode& command) const;

  private:
    const CommandSchema* lookup(const std::string& name) const;
    bool enrichCommand(AstNode& command) const;
    std::optional<Shape> analyze(AstNode& command, std::size_t first_word) const;
    void applyAnnotations(const Shape& shape) const;
    bool enrichShC(AstNode& command, const std::vector<AstNode*>& words) const;

    std::vector<CommandSchema> schemas_;
};

} // namespace dockfix
