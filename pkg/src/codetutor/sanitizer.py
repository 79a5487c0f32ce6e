"""Unsafe-operation denylist enforced before any execution.

Structural rules (imports, bare-name calls, attribute access) are matched
on the syntax tree, so identifiers or strings that merely contain a
blocked name never trigger them.  Only rules of kind ``pattern`` look at
the raw source text, which is how payloads hidden inside string literals
(e.g. an encoded import fed to ``eval``) are caught.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .errors import RegistryMissing
from .registry import data_path, load_records
from .source import SourceUnit

MIN_RULES = 75

KIND_MODULE = "module-import"
KIND_BUILTIN = "builtin-call"
KIND_ATTRIBUTE = "attribute-access"
KIND_PATTERN = "pattern"
KINDS = (KIND_MODULE, KIND_BUILTIN, KIND_ATTRIBUTE, KIND_PATTERN)


@dataclass(frozen=True)
class DenyRule:
    rule_id: str
    kind: str
    subject: str
    rationale: str


@dataclass(frozen=True)
class Violation:
    rule_id: str
    line: int
    matched: str


@dataclass(frozen=True)
class SanitizerVerdict:
    allowed: bool
    violations: tuple[Violation, ...] = ()


class DenyRegistry:
    def __init__(self, rules: list[DenyRule]):
        if len(rules) < MIN_RULES:
            raise RegistryMissing(
                f"denylist holds {len(rules)} rules, need at least {MIN_RULES}"
            )
        ids = [r.rule_id for r in rules]
        if len(set(ids)) != len(ids):
            raise RegistryMissing("denylist rule ids are not unique")
        self.rules = tuple(rules)
        self.by_module = {r.subject: r for r in rules if r.kind == KIND_MODULE}
        self.by_builtin = {r.subject: r for r in rules if r.kind == KIND_BUILTIN}
        self.by_attribute = {r.subject: r for r in rules if r.kind == KIND_ATTRIBUTE}
        self.patterns = [
            (r, re.compile(r.subject)) for r in rules if r.kind == KIND_PATTERN
        ]

    @classmethod
    def from_file(cls, path: str | Path) -> "DenyRegistry":
        rules = []
        for rec in load_records(path):
            kind = rec.get("kind", "")
            if kind not in KINDS:
                raise RegistryMissing(f"rule {rec.get('id')}: unknown kind {kind!r}")
            rules.append(
                DenyRule(
                    rule_id=rec["id"],
                    kind=kind,
                    subject=rec["subject"],
                    rationale=rec.get("rationale", ""),
                )
            )
        return cls(rules)


@lru_cache(maxsize=1)
def default_registry() -> DenyRegistry:
    return DenyRegistry.from_file(data_path("denylist"))


def _segment(source: SourceUnit, node: ast.AST, fallback: str) -> str:
    try:
        return ast.get_source_segment(source.text, node) or fallback
    except Exception:
        return fallback


def sanitize(
    tree: ast.Module, source: SourceUnit, registry: DenyRegistry | None = None
) -> SanitizerVerdict:
    """Check a parsed tree (plus raw text for pattern rules) against the denylist."""
    registry = registry or default_registry()
    violations: list[Violation] = []

    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                root = alias.name.split(".")[0]
                rule = registry.by_module.get(root)
                if rule:
                    violations.append(
                        Violation(rule.rule_id, node.lineno, f"import {alias.name}")
                    )
        elif isinstance(node, ast.ImportFrom):
            if node.module:
                root = node.module.split(".")[0]
                rule = registry.by_module.get(root)
                if rule:
                    violations.append(
                        Violation(rule.rule_id, node.lineno, f"from {node.module} import ...")
                    )
        elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            rule = registry.by_builtin.get(node.func.id)
            if rule:
                violations.append(
                    Violation(
                        rule.rule_id,
                        node.lineno,
                        _segment(source, node, f"{node.func.id}(...)"),
                    )
                )
        elif isinstance(node, ast.Attribute):
            rule = registry.by_attribute.get(node.attr)
            if rule:
                violations.append(
                    Violation(
                        rule.rule_id,
                        node.lineno,
                        _segment(source, node, f".{node.attr}"),
                    )
                )

    for rule, pattern in registry.patterns:
        for m in pattern.finditer(source.text):
            line = source.text.count("\n", 0, m.start()) + 1
            violations.append(Violation(rule.rule_id, line, m.group(0)))

    # one report per (rule, line); deterministic order
    unique = {}
    for v in violations:
        unique.setdefault((v.line, v.rule_id), v)
    ordered = tuple(unique[k] for k in sorted(unique))
    return SanitizerVerdict(allowed=not ordered, violations=ordered)


def rule_by_id(rule_id: str, registry: DenyRegistry | None = None) -> DenyRule:
    registry = registry or default_registry()
    for rule in registry.rules:
        if rule.rule_id == rule_id:
            return rule
    raise KeyError(rule_id)
