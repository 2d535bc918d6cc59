"""Audit report types shared by the tree and forest consistency checkers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    """One inconsistency found by an audit.

    where : locates the node ('tree 3: root.L.R') or structure checked.
    what  : which invariant failed.
    detail : expected-vs-found description.
    """

    where: str
    what: str
    detail: str = ""

    def __str__(self):
        s = "%s: %s" % (self.where, self.what)
        return "%s (%s)" % (s, self.detail) if self.detail else s


@dataclass
class AuditReport:
    violations: list[Violation] = field(default_factory=list)
    nodes_checked: int = 0

    @property
    def ok(self):
        return not self.violations

    def flag(self, where, what, detail=""):
        self.violations.append(Violation(where, str(what), str(detail)))

    def merge(self, other):
        self.violations.extend(other.violations)
        self.nodes_checked += other.nodes_checked
        return self

    def summary(self):
        if self.ok:
            return "audit clean: %d nodes checked" % self.nodes_checked
        lines = ["audit FAILED: %d violations over %d nodes"
                 % (len(self.violations), self.nodes_checked)]
        lines += ["  " + str(v) for v in self.violations[:20]]
        if len(self.violations) > 20:
            lines.append("  ... %d more" % (len(self.violations) - 20))
        return "\n".join(lines)
