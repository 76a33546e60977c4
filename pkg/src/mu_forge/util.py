"""Small shared helpers: verdicts and sequence utilities."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check. Truthy iff the check passed.

    `reason` names the violated condition on failure; `detail` carries
    machine-readable context (offending node, clause index, lasso, ...).
    """

    ok: bool
    reason: str = ""
    detail: object = None

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        if self.ok:
            return "Verdict(ok)"
        return f"Verdict(fail: {self.reason})"


ACCEPT = Verdict(True)


def refuse(reason: str, detail: object = None) -> Verdict:
    return Verdict(False, reason, detail)


def is_subsequence(a, b) -> bool:
    """True iff sequence a embeds into sequence b preserving order."""
    it = iter(b)
    return all(x in it for x in a)


def subseq_restrict(a, allowed) -> tuple:
    """Subsequence of a keeping only elements in `allowed`."""
    keep = frozenset(allowed)
    return tuple(x for x in a if x in keep)
