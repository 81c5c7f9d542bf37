#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dockfix/ast.hpp"
#include "dockfix/parser.hpp"
#include "dockfix/query.hpp"

#include <random>

using namespace dockfix;

namespace {

AstNode::Ptr leaf(NodeKind kind, std::string value = "") {
    if (value.empty()) {
        return std::make_unique<AstNode>(kind);
    }
    return std::make_unique<AstNode>(kind, std::move(value));
}

/// Independent oracle: enumerate every assignment of child patterns to
/// subtree nodes by brute force and check head/descendant conditions
/// directly, without going through matches().
void collectSubtreeNodes(const AstNode& n, std::vector<const AstNode*>& out) {
    for (const auto& c : n.children()) {
        out.push_back(c.get());
        collectSubtreeNodes(*c, out);
    }
}

bool oracleMatches(const AstNode& node, const QueryPattern& p);

bool oracleAssign(const std::vector<const AstNode*>& pool,
                  const std::vector<QueryPattern>& patterns, std::size_t at,
                  std::vector<const AstNode*>& used) {
    if (at == patterns.size()) {
        return true;
    }
    for (const AstNode* cand : pool) {
        if (std::find(used.begin(), used.end(), cand) != used.end()) {
            continue;
        }
        if (!oracleMatches(*cand, patterns[at])) {
            continue;
        }
        used.push_back(cand);
        if (oracleAssign(pool, patterns, at + 1, used)) {
            return true;
        }
        used.pop_back();
    }
    return false;
}

bool oracleMatches(const AstNode& node, const QueryPattern& p) {
    if (!p.headMatches(node)) {
        return false;
    }
    std::vector<const AstNode*> pool;
    collectSubtreeNodes(node, pool);
    std::vector<const AstNode*> used;
    return oracleAssign(pool, p.children(), 0, used);
}

/// Random small trees for property checks.
AstNode::Ptr randomTree(std::mt19937& rng, int max_nodes, int& budget) {
    static const NodeKind kinds[] = {NodeKind::BashCommand, NodeKind::BashCommandArgs,
                                     NodeKind::BashLiteral, NodeKind::BashCommandName,
                                     NodeKind::BashScript};
    auto node = std::make_unique<AstNode>(kinds[rng() % 5]);
    --budget;
    std::uniform_int_distribution<int> kids(0, 3);
    int n = kids(rng);
    for (int i = 0; i < n && budget > 0; ++i) {
        node->adoptChild(randomTree(rng, max_nodes, budget));
    }
    return node;
}

} // namespace

TEST_CASE("matches: annotation head") {
    AstNode cmd(NodeKind::BashCommand);
    cmd.annotate("NPM-CACHE-CLEAN");
    CHECK(matches(cmd, Q("NPM-CACHE-CLEAN")));
    CHECK_FALSE(matches(cmd, Q("NPM-F-FORCE")));
}

TEST_CASE("matches: reflexive kind match") {
    AstNode node(NodeKind::BashLiteral);
    CHECK(matches(node, Q(NodeKind::BashLiteral)));
}

TEST_CASE("matches: distinctness of child bindings") {
    // Command with exactly one args child must not satisfy a pattern
    // demanding two distinct args. Verified against the enumeration oracle.
    auto cmd = std::make_unique<AstNode>(NodeKind::BashCommand);
    cmd->adoptChild(leaf(NodeKind::BashCommandName));
    cmd->adoptChild(leaf(NodeKind::BashCommandArgs));
    QueryPattern two_args = Q(NodeKind::BashCommand, Q(NodeKind::BashCommandArgs),
                              Q(NodeKind::BashCommandArgs));
    CHECK_FALSE(matches(*cmd, two_args));
    CHECK(matches(*cmd, two_args) == oracleMatches(*cmd, two_args));

    cmd->adoptChild(leaf(NodeKind::BashCommandArgs));
    CHECK(matches(*cmd, two_args));
    CHECK(matches(*cmd, two_args) == oracleMatches(*cmd, two_args));
}

TEST_CASE("matches equals enumeration oracle on random trees") {
    std::mt19937 rng(1234);
    std::vector<QueryPattern> patterns;
    patterns.push_back(Q(NodeKind::BashCommand, Q(NodeKind::BashCommandArgs)));
    patterns.push_back(
        Q(NodeKind::BashCommand, Q(NodeKind::BashCommandArgs), Q(NodeKind::BashCommandArgs)));
    patterns.push_back(Q(NodeKind::BashScript, Q(NodeKind::BashCommand, Q(NodeKind::BashLiteral))));
    patterns.push_back(Q(NodeKind::BashCommandArgs));
    for (int iter = 0; iter < 300; ++iter) {
        int budget = 10;
        auto tree = randomTree(rng, 10, budget);
        for (const auto& p : patterns) {
            std::vector<const AstNode*> nodes{tree.get()};
            collectSubtreeNodes(*tree, nodes);
            for (const AstNode* n : nodes) {
                CHECK(matches(*n, p) == oracleMatches(*n, p));
            }
        }
    }
}

TEST_CASE("find equals traversal-filter oracle on random trees") {
    std::mt19937 rng(99);
    QueryPattern p = Q(NodeKind::BashCommand, Q(NodeKind::BashCommandArgs));
    for (int iter = 0; iter < 200; ++iter) {
        int budget = 12;
        auto tree = randomTree(rng, 12, budget);
        auto found = find(static_cast<const AstNode&>(*tree), p);
        std::vector<const AstNode*> expected;
        traverse(static_cast<const AstNode&>(*tree), [&](const AstNode& n) {
            if (oracleMatches(n, p)) {
                expected.push_back(&n);
            }
        });
        CHECK(found == expected);
    }
}

TEST_CASE("find on empty document") {
    AstNode root(NodeKind::DockerFile);
    CHECK(find(static_cast<const AstNode&>(root), Q(NodeKind::BashCommand)).empty());
}

TEST_CASE("navigation: parent, child, element") {
    std::vector<ParseDiagnostic> diags;
    SourceSpan base;
    auto script = parseShellFragment("apt-get install wget", base, diags);
    REQUIRE(script != nullptr);
    AstNode* cmd = script->getChild(NodeKind::BashCommand);
    REQUIRE(cmd != nullptr);
    auto args = cmd->getChildren(NodeKind::BashCommandArgs);
    REQUIRE(args.size() == 2);

    // From an args node, getParent walks to the enclosing command.
    CHECK(args[1]->getParent(NodeKind::BashCommand) == cmd);
    CHECK(args[1]->getParent(NodeKind::BashScript) == script.get());

    // getChild inspects direct children only.
    CHECK(script->getChild(NodeKind::BashCommandArgs) == nullptr);
    CHECK(script->getElement(NodeKind::BashCommandArgs) == args[0]);

    // getChild on a leaf yields none.
    AstNode* name_lit = cmd->getChild(NodeKind::BashCommandName)
                            ->getChild(NodeKind::BashLiteral);
    REQUIRE(name_lit != nullptr);
    CHECK(name_lit->getChild(NodeKind::BashLiteral) == nullptr);
}

TEST_CASE("getElements equals flat preorder scan") {
    std::vector<ParseDiagnostic> diags;
    SourceSpan base;
    auto script = parseShellFragment(
        "apt-get update && apt-get install -y curl wget && rm -rf /tmp/x", base, diags);
    auto elements = script->getElements(NodeKind::BashCommandArgs);
    std::vector<const AstNode*> expected;
    traverse(static_cast<const AstNode&>(*script), [&](const AstNode& n) {
        if (n.kind() == NodeKind::BashCommandArgs && &n != script.get()) {
            expected.push_back(&n);
        }
    });
    REQUIRE(elements.size() == expected.size());
    for (std::size_t i = 0; i < elements.size(); ++i) {
        CHECK(elements[i] == expected[i]);
    }
}

TEST_CASE("mutation: addChild dirties the path to the root") {
    std::vector<ParseDiagnostic> diags;
    SourceSpan base;
    auto script = parseShellFragment("npm cache clean", base, diags);
    AstNode* cmd = script->getChild(NodeKind::BashCommand);
    REQUIRE(cmd != nullptr);
    CHECK_FALSE(cmd->modified());

    auto arg = std::make_unique<AstNode>(NodeKind::BashCommandArgs);
    arg->adoptChild(std::make_unique<AstNode>(NodeKind::BashLiteral, std::string("--force")));
    addChild(*cmd, std::move(arg), cmd->childCount());

    CHECK(cmd->childCount() == 4);
    CHECK(cmd->modified());
    CHECK(script->modified());
}

TEST_CASE("mutation: remove then re-insert restores structure") {
    std::vector<ParseDiagnostic> diags;
    SourceSpan base;
    auto script = parseShellFragment("apt-get install -y curl", base, diags);
    auto reference = script->clone();

    AstNode* cmd = script->getChild(NodeKind::BashCommand);
    auto args = cmd->getChildren(NodeKind::BashCommandArgs);
    REQUIRE(args.size() == 3);
    std::size_t idx = cmd->indexOf(*args[1]);
    auto detached = removeNode(*args[1]);
    addChild(*cmd, std::move(detached), idx);

    CHECK(structurallyEqual(*script, *reference));
    CHECK(script->modified());
    CHECK_FALSE(reference->modified());
}

TEST_CASE("mutation: root is protected") {
    ParseResult parsed = parseDockerfile("FROM alpine\n");
    CHECK_THROWS_AS(removeNode(*parsed.root), StructuralError);
    CHECK_THROWS_AS(replaceNode(*parsed.root, std::make_unique<AstNode>(NodeKind::DockerFile)),
                    StructuralError);
}

TEST_CASE("dirty propagation after random mutation sequences") {
    std::mt19937 rng(7);
    for (int iter = 0; iter < 30; ++iter) {
        ParseResult parsed = parseDockerfile(
            "FROM ubuntu\nRUN apt-get update && apt-get install -y curl wget git\n"
            "RUN npm install && npm cache clean --force\n");
        std::vector<AstNode*> nodes;
        traverse(*parsed.root, [&](AstNode& n) {
            if (n.kind() == NodeKind::BashCommand) {
                nodes.push_back(&n);
            }
        });
        REQUIRE(!nodes.empty());
        for (int m = 0; m < 20; ++m) {
            AstNode* target = nodes[rng() % nodes.size()];
            auto arg = std::make_unique<AstNode>(NodeKind::BashCommandArgs);
            arg->adoptChild(
                std::make_unique<AstNode>(NodeKind::BashLiteral, std::string("-x")));
            addChild(*target, std::move(arg), target->childCount());
        }
        // Every modified node must have an all-modified ancestor chain.
        traverse(*parsed.root, [&](AstNode& n) {
            if (n.modified()) {
                for (AstNode* p = n.parent(); p != nullptr; p = p->parent()) {
                    CHECK(p->modified());
                }
            }
        });
    }
}

TEST_CASE("annotations: idempotent, queryable") {
    AstNode node(NodeKind::BashCommand);
    CHECK_FALSE(node.hasAnnotation("PACKAGE"));
    node.annotate("PACKAGE");
    CHECK(node.hasAnnotation("PACKAGE"));
    auto before = node.annotations();
    node.annotate("PACKAGE");
    CHECK(node.annotations() == before);
}

TEST_CASE("span containment and document order over a parsed file") {
    ParseResult parsed = parseDockerfile("FROM ubuntu:20.04\n"
                                         "# comment\n"
                                         "RUN apt-get update && \\\n"
                                         "    apt-get install -y curl\n"
                                         "ENTRYPOINT [\"curl\"]\n");
    REQUIRE_FALSE(parsed.hasErrors());
    traverse(*parsed.root, [&](const AstNode& n) {
        std::size_t last_start = 0;
        bool first = true;
        for (const auto& c : n.children()) {
            CHECK(n.span().start_offset <= c->span().start_offset);
            CHECK(c->span().end_offset <= n.span().end_offset);
            if (!first) {
                CHECK(c->span().start_offset >= last_start);
            }
            last_start = c->span().start_offset;
            first = false;
        }
    });
}
