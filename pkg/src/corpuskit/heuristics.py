"""Rule-based first-pass filters for web text and code files.

All rules are evaluated on every document (no short-circuit) so a verdict
always carries the full measurement map, which makes threshold sweeps and
reject-side debugging cheap. Filtering is a pure per-document function;
output is always a subset of the input and text is never modified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .corpus import Document

CODE_LANGUAGE_WHITELIST = ("python", "javascript", "java", "c")

DEFAULT_AUTOGEN_MARKERS = (
    "auto-generated",
    "autogenerated",
    "automatically generated",
    "do not edit",
    "generated by",
)


@dataclass(frozen=True)
class FilterRuleSet:
    """Ordered (rule_id, params) pairs targeting either web text or code."""

    target: str  # "web" or "code"
    rules: tuple[tuple[str, dict], ...]
    name: str = "custom"

    def __post_init__(self):
        if self.target not in ("web", "code"):
            raise ValueError(f"ruleset target must be 'web' or 'code', got {self.target!r}")
        ids = [rule_id for rule_id, _ in self.rules]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate rule ids in ruleset: {ids}")

    def with_params(self, rule_id: str, **params) -> "FilterRuleSet":
        """Copy of this ruleset with one rule's parameters overridden."""
        rules = tuple(
            (rid, {**p, **params} if rid == rule_id else p) for rid, p in self.rules
        )
        return FilterRuleSet(target=self.target, rules=rules, name=self.name)


@dataclass
class FilterVerdict:
    keep: bool
    failed_rules: list[str]
    stats: dict[str, float]

    def __post_init__(self):
        assert self.keep == (not self.failed_rules)


# Each rule measures one quantity and returns (passed, measured_value).
RuleFn = Callable[[Document, dict], tuple[bool, float]]


def _nonempty_lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def _rule_min_word_count(doc: Document, params: dict) -> tuple[bool, float]:
    n = len(doc.text.split())
    return n >= params["min"], float(n)


def _rule_max_nonalnum_fraction(doc: Document, params: dict) -> tuple[bool, float]:
    # Measured over non-whitespace characters; counting spaces would push
    # ordinary prose near the threshold and make the rule meaningless.
    chars = [c for c in doc.text if not c.isspace()]
    if not chars:
        return False, 1.0
    frac = sum(1 for c in chars if not c.isalnum()) / len(chars)
    return frac <= params["max"], frac


def _rule_max_dup_line_fraction(doc: Document, params: dict) -> tuple[bool, float]:
    lines = _nonempty_lines(doc.text)
    if not lines:
        return False, 1.0
    frac = (len(lines) - len(set(lines))) / len(lines)
    return frac <= params["max"], frac


def _rule_min_mean_word_length(doc: Document, params: dict) -> tuple[bool, float]:
    words = doc.text.split()
    if not words:
        return False, 0.0
    mean = sum(len(w) for w in words) / len(words)
    return mean >= params["min"], mean


def _rule_max_ellipsis_line_fraction(doc: Document, params: dict) -> tuple[bool, float]:
    lines = _nonempty_lines(doc.text)
    if not lines:
        return True, 0.0
    frac = sum(1 for ln in lines if ln.endswith("...") or ln.endswith("…")) / len(lines)
    return frac <= params["max"], frac


def _rule_language_whitelist(doc: Document, params: dict) -> tuple[bool, float]:
    lang = doc.meta.get("language")
    allowed = params["allowed"]
    return (lang in allowed), float(lang in allowed)


def _rule_max_line_length(doc: Document, params: dict) -> tuple[bool, float]:
    longest = max((len(ln) for ln in doc.text.splitlines()), default=0)
    return longest <= params["max"], float(longest)


def _rule_max_file_size(doc: Document, params: dict) -> tuple[bool, float]:
    size = len(doc.text.encode("utf-8"))
    return size <= params["max"], float(size)


def _rule_min_alpha_fraction(doc: Document, params: dict) -> tuple[bool, float]:
    if not doc.text:
        return False, 0.0
    frac = sum(1 for c in doc.text if c.isalpha()) / len(doc.text)
    return frac >= params["min"], frac


def _rule_no_autogen_markers(doc: Document, params: dict) -> tuple[bool, float]:
    lowered = doc.text.lower()
    hits = sum(1 for marker in params["markers"] if marker in lowered)
    return hits == 0, float(hits)


_RULE_FNS: dict[str, RuleFn] = {
    "min_word_count": _rule_min_word_count,
    "max_nonalnum_fraction": _rule_max_nonalnum_fraction,
    "max_dup_lines": _rule_max_dup_line_fraction,
    "min_mean_word_length": _rule_min_mean_word_length,
    "max_ellipsis_lines": _rule_max_ellipsis_line_fraction,
    "language_whitelist": _rule_language_whitelist,
    "max_line_length": _rule_max_line_length,
    "max_file_size": _rule_max_file_size,
    "min_alpha_fraction": _rule_min_alpha_fraction,
    "no_autogen_markers": _rule_no_autogen_markers,
}


def default_web_rules(**overrides) -> FilterRuleSet:
    """The "fineweb-like-v1" web ruleset. Every threshold is configurable."""
    params = {
        "min_word_count": 50,
        "max_nonalnum_fraction": 0.3,
        "max_dup_lines": 0.3,
        "min_mean_word_length": 2,
        "max_ellipsis_lines": 0.3,
    }
    params.update(overrides)
    return FilterRuleSet(
        target="web",
        name="fineweb-like-v1",
        rules=(
            ("min_word_count", {"min": params["min_word_count"]}),
            ("max_nonalnum_fraction", {"max": params["max_nonalnum_fraction"]}),
            ("max_dup_lines", {"max": params["max_dup_lines"]}),
            ("min_mean_word_length", {"min": params["min_mean_word_length"]}),
            ("max_ellipsis_lines", {"max": params["max_ellipsis_lines"]}),
        ),
    )


def default_code_rules(
    extra_languages: tuple[str, ...] = (),
    autogen_markers: tuple[str, ...] = DEFAULT_AUTOGEN_MARKERS,
    **overrides,
) -> FilterRuleSet:
    """The "code-basic-v1" ruleset for source files."""
    params = {"max_line_length": 1000, "max_file_size": 1 << 20, "min_alpha_fraction": 0.25}
    params.update(overrides)
    return FilterRuleSet(
        target="code",
        name="code-basic-v1",
        rules=(
            ("language_whitelist", {"allowed": CODE_LANGUAGE_WHITELIST + tuple(extra_languages)}),
            ("max_line_length", {"max": params["max_line_length"]}),
            ("max_file_size", {"max": params["max_file_size"]}),
            ("min_alpha_fraction", {"min": params["min_alpha_fraction"]}),
            ("no_autogen_markers", {"markers": tuple(autogen_markers)}),
        ),
    )


RULESETS: dict[str, Callable[[], FilterRuleSet]] = {
    "fineweb-like-v1": default_web_rules,
    "code-basic-v1": default_code_rules,
}


def _apply_rules(doc: Document, rules: FilterRuleSet) -> FilterVerdict:
    failed: list[str] = []
    stats: dict[str, float] = {}
    for rule_id, params in rules.rules:
        fn = _RULE_FNS.get(rule_id)
        if fn is None:
            raise ValueError(f"unknown rule id {rule_id!r}")
        passed, measured = fn(doc, params)
        stats[rule_id] = measured
        if not passed:
            failed.append(rule_id)
    return FilterVerdict(keep=not failed, failed_rules=failed, stats=stats)


def apply_web_filters(doc: Document, rules: FilterRuleSet) -> FilterVerdict:
    if rules.target != "web":
        raise ValueError("apply_web_filters needs a ruleset with target='web'")
    return _apply_rules(doc, rules)


def apply_code_filters(doc: Document, rules: FilterRuleSet) -> FilterVerdict:
    """Code filters. A missing language tag fails as "unknown_language"."""
    if rules.target != "code":
        raise ValueError("apply_code_filters needs a ruleset with target='code'")
    if "language" not in doc.meta:
        return FilterVerdict(keep=False, failed_rules=["unknown_language"], stats={})
    return _apply_rules(doc, rules)


def colon_ending_filter(doc: Document) -> FilterVerdict:
    """Reject text whose final non-whitespace character is a colon.

    Text ending "…:" reads as a dangling prompt; both the ASCII and the
    full-width colon count. Empty documents pass (nothing to judge here;
    the web ruleset rejects them anyway).
    """
    trimmed = doc.text.rstrip()
    bad = trimmed.endswith(":") or trimmed.endswith("：")
    return FilterVerdict(
        keep=not bad,
        failed_rules=["colon_ending"] if bad else [],
        stats={"colon_ending": float(bad)},
    )


def colon_rule_applies(doc: Document, widen: bool = False) -> bool:
    """Whether the colon rule targets this document.

    Default scope is mathematical web text: source "math", or source "web"
    with domain label "math". `widen` applies it to every document.
    """
    if widen:
        return True
    return doc.source == "math" or (doc.source == "web" and doc.domain_label == "math")
