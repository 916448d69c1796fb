"""Rule-template extraction of causal mentions with BIO tagging.

Rules are data: one per line, "id <TAB> priority <TAB> pattern <TAB> constraint".
Patterns are regular expressions with named groups ``cause`` and ``effect``
matched against the space-joined token surfaces of one sentence (case
insensitive); matched character ranges map back to token spans. Constraints
are conjunctions ("&") of atoms:

    pos(i)=TAG            token i of the sentence carries POS TAG
    contains_verb(cause)  the cause span contains a verb
    contains_verb(effect) the effect span contains a verb
    len(cause)<=k         cause span has at most k tokens
    len(effect)<=k        effect span has at most k tokens

"-" means unconstrained. When several matches compete for the same tokens the
higher priority wins, then the leftmost-longest.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .corpus import ParsedSentence, Token
from .errors import ConfigError, DataError
from .events import ExtractionConfig, extract_events
from .seqrel import EvalMetrics, _harmonic

log = logging.getLogger(__name__)

BIO_TAGS = ("B-cause", "I-cause", "B-effect", "I-effect", "O")

_PUNCT_RE = re.compile(r"^\W+$", re.UNICODE)


@dataclass(frozen=True)
class CausalRule:
    id: str
    pattern: re.Pattern
    constraint: Callable[[ParsedSentence, tuple[int, int], tuple[int, int]], bool]
    constraint_text: str
    priority: int


@dataclass(frozen=True)
class CausalMention:
    doc_id: str
    sent_index: int
    cause_span: tuple[int, int]  # 0-based inclusive token range
    effect_span: tuple[int, int]
    rule_id: str
    cause_event: str | None = None
    effect_event: str | None = None

    def footprint(self) -> tuple[int, int]:
        lo = min(self.cause_span[0], self.effect_span[0])
        hi = max(self.cause_span[1], self.effect_span[1])
        return lo, hi


@dataclass(frozen=True)
class BioTagging:
    tags: tuple[str, ...]


_ATOM_POS = re.compile(r"^pos\((\d+)\)=([A-Za-z$:،.]+)$")
_ATOM_VERB = re.compile(r"^contains_verb\((cause|effect)\)$")
_ATOM_LEN = re.compile(r"^len\((cause|effect)\)<=(\d+)$")

_VERB_POS = ExtractionConfig().verb_pos


def _compile_constraint(
    text: str, rule_id: str
) -> Callable[[ParsedSentence, tuple[int, int], tuple[int, int]], bool]:
    if text == "-":
        return lambda sent, cause, effect: True
    checks = []
    for atom in (a.strip() for a in text.split("&")):
        if m := _ATOM_POS.match(atom):
            i, tag = int(m.group(1)), m.group(2)
            checks.append(
                lambda sent, cause, effect, i=i, tag=tag: i < len(sent)
                and sent.tokens[i].pos == tag
            )
        elif m := _ATOM_VERB.match(atom):
            which = m.group(1)
            checks.append(
                lambda sent, cause, effect, which=which: any(
                    t.pos in _VERB_POS
                    for t in sent.tokens[slice(*_pick(which, cause, effect))]
                )
            )
        elif m := _ATOM_LEN.match(atom):
            which, k = m.group(1), int(m.group(2))
            checks.append(
                lambda sent, cause, effect, which=which, k=k: (
                    lambda span: span[1] - span[0] + 1 <= k
                )(cause if which == "cause" else effect)
            )
        else:
            raise ConfigError(f"rule {rule_id!r}: unknown constraint atom {atom!r}")
    return lambda sent, cause, effect: all(c(sent, cause, effect) for c in checks)


def _pick(which: str, cause: tuple[int, int], effect: tuple[int, int]) -> tuple[int, int]:
    span = cause if which == "cause" else effect
    return span[0], span[1] + 1


# accept (?<name>...) as an alias for (?P<name>...), leaving lookbehinds alone
_GROUP_ALIAS = re.compile(r"\(\?<(?![=!])")


def _compile_pattern(raw: str, rule_id: str) -> re.Pattern:
    source = _GROUP_ALIAS.sub("(?P<", raw)
    try:
        pattern = re.compile(source, re.IGNORECASE)
    except re.error as exc:
        raise ConfigError(f"rule {rule_id!r}: bad pattern: {exc}") from exc
    missing = {"cause", "effect"} - set(pattern.groupindex)
    if missing:
        raise ConfigError(f"rule {rule_id!r}: pattern lacks groups {sorted(missing)}")
    return pattern


def load_rules(path: str | Path) -> list[CausalRule]:
    """Parse a rule file; result is sorted by descending priority."""
    rules: list[CausalRule] = []
    seen_priorities: dict[int, str] = {}
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ConfigError(f"{path}:{n}: expected 4 tab-separated fields")
            rule_id, prio_text, pattern_text, constraint_text = parts
            try:
                priority = int(prio_text)
            except ValueError as exc:
                raise ConfigError(f"rule {rule_id!r}: bad priority {prio_text!r}") from exc
            if priority in seen_priorities:
                raise ConfigError(
                    f"rule {rule_id!r}: priority {priority} already used by "
                    f"{seen_priorities[priority]!r}"
                )
            seen_priorities[priority] = rule_id
            rules.append(
                CausalRule(
                    id=rule_id,
                    pattern=_compile_pattern(pattern_text, rule_id),
                    constraint=_compile_constraint(constraint_text, rule_id),
                    constraint_text=constraint_text,
                    priority=priority,
                )
            )
    if not rules:
        log.warning("rule file %s contains no rules", path)
    return sorted(rules, key=lambda r: -r.priority)


def default_rules_path() -> Path:
    return Path(__file__).parent / "resources" / "causal_rules.tsv"


def _char_to_token_map(sentence: ParsedSentence) -> tuple[str, list[int]]:
    """Space-joined surface text plus a per-character token index."""
    text_parts: list[str] = []
    owner: list[int] = []
    for i, tok in enumerate(sentence.tokens):
        if text_parts:
            text_parts.append(" ")
            owner.append(i)  # separator belongs to the following token
        text_parts.append(tok.surface)
        owner.extend([i] * len(tok.surface))
    return "".join(text_parts), owner


def _group_token_span(match: re.Match, group: str, owner: list[int]) -> tuple[int, int] | None:
    start, end = match.span(group)
    if start >= end:
        return None
    return owner[start], owner[end - 1]


def _trim_punct(span: tuple[int, int], tokens: Sequence[Token]) -> tuple[int, int] | None:
    lo, hi = span
    while lo <= hi and (tokens[lo].pos == "PUNCT" or _PUNCT_RE.match(tokens[lo].surface)):
        lo += 1
    while hi >= lo and (tokens[hi].pos == "PUNCT" or _PUNCT_RE.match(tokens[hi].surface)):
        hi -= 1
    return (lo, hi) if lo <= hi else None


def apply_rules(sentence: ParsedSentence, rules: Sequence[CausalRule]) -> list[CausalMention]:
    """Extract causal mentions, resolving collisions by priority then position."""
    text, owner = _char_to_token_map(sentence)
    candidates: list[tuple[int, int, int, CausalMention]] = []
    for rule in rules:
        for match in rule.pattern.finditer(text):
            cause = _group_token_span(match, "cause", owner)
            effect = _group_token_span(match, "effect", owner)
            if cause is None or effect is None:
                continue
            cause = _trim_punct(cause, sentence.tokens)
            effect = _trim_punct(effect, sentence.tokens)
            if cause is None or effect is None:
                continue
            if not (cause[1] < effect[0] or effect[1] < cause[0]):
                continue  # cause and effect must not overlap
            if not rule.constraint(sentence, cause, effect):
                continue
            mention = CausalMention(
                doc_id=sentence.doc_id,
                sent_index=sentence.sent_index,
                cause_span=cause,
                effect_span=effect,
                rule_id=rule.id,
            )
            lo, hi = mention.footprint()
            candidates.append((rule.priority, lo, hi, mention))
    candidates.sort(key=lambda c: (-c[0], c[1], -(c[2] - c[1])))
    accepted: list[CausalMention] = []
    taken: list[tuple[int, int]] = []
    for _prio, lo, hi, mention in candidates:
        if any(not (hi < t_lo or lo > t_hi) for t_lo, t_hi in taken):
            continue
        accepted.append(mention)
        taken.append((lo, hi))
    accepted.sort(key=lambda m: m.footprint())
    return accepted


def extract_causal_mentions(
    corpus_sentences: Iterable[ParsedSentence], rules: Sequence[CausalRule]
) -> list[CausalMention]:
    out: list[CausalMention] = []
    for sentence in corpus_sentences:
        out.extend(apply_rules(sentence, rules))
    return out


def resolve_mentions(
    mentions: Sequence[CausalMention],
    sentences: dict[tuple[str, int], ParsedSentence],
    config: ExtractionConfig | None = None,
) -> list[CausalMention]:
    """Attach event keys whose trigger verb falls inside each mention span."""
    config = config or ExtractionConfig()
    out = []
    for m in mentions:
        sent = sentences.get((m.doc_id, m.sent_index))
        if sent is None:
            out.append(m)
            continue
        events = extract_events(sent, config)
        cause = _event_in_span(events, m.cause_span)
        effect = _event_in_span(events, m.effect_span)
        out.append(replace(m, cause_event=cause, effect_event=effect))
    return out


def _event_in_span(occurrences, span: tuple[int, int]) -> str | None:
    inside = [o for o in occurrences if span[0] <= o.pred_index <= span[1]]
    if not inside:
        return None
    inside.sort(key=lambda o: (o.token_span[0], o.pred_index))
    return inside[0].event


def to_bio(sentence: ParsedSentence, mentions: Sequence[CausalMention]) -> BioTagging:
    """Tag each token; mentions must be in bounds and mutually disjoint."""
    n = len(sentence)
    tags = ["O"] * n
    claimed = [False] * n
    for m in mentions:
        for kind, (lo, hi) in (("cause", m.cause_span), ("effect", m.effect_span)):
            if lo < 0 or hi >= n or lo > hi:
                raise DataError(f"{kind} span {(lo, hi)} out of bounds for {n}-token sentence")
            if any(claimed[lo : hi + 1]):
                raise DataError(f"overlapping mention spans at tokens {lo}..{hi}")
            for i in range(lo, hi + 1):
                claimed[i] = True
                tags[i] = f"B-{kind}" if i == lo else f"I-{kind}"
    return BioTagging(tags=tuple(tags))


def validate_bio(tags: Sequence[str]) -> None:
    prev = "O"
    for i, tag in enumerate(tags):
        if tag not in BIO_TAGS:
            raise DataError(f"unknown tag {tag!r} at {i}")
        if tag.startswith("I-") and prev not in (f"B-{tag[2:]}", tag):
            raise DataError(f"dangling {tag} at {i} after {prev}")
        prev = tag


def decode_bio(tags: Sequence[str]) -> dict[str, list[tuple[int, int]]]:
    """Spans per kind, in textual order; input must be well formed."""
    validate_bio(tags)
    spans: dict[str, list[tuple[int, int]]] = {"cause": [], "effect": []}
    i = 0
    while i < len(tags):
        if tags[i].startswith("B-"):
            kind = tags[i][2:]
            j = i
            while j + 1 < len(tags) and tags[j + 1] == f"I-{kind}":
                j += 1
            spans[kind].append((i, j))
            i = j + 1
        else:
            i += 1
    return spans


def evaluate_extraction(
    pred: Sequence[CausalMention],
    gold: Sequence[CausalMention],
    sentences: Sequence[ParsedSentence] | None = None,
) -> EvalMetrics:
    """Span-level exact-match P/R/F1; token-level accuracy when sentences given.

    A prediction matches gold only when document, sentence, cause span, and
    effect span all agree.
    """

    def signature(m: CausalMention):
        return (m.doc_id, m.sent_index, m.cause_span, m.effect_span)

    gold_set = {signature(m) for m in gold}
    pred_set = {signature(m) for m in pred}
    tp = len(gold_set & pred_set)
    precision = 100.0 * tp / len(pred_set) if pred_set else 0.0
    recall = 100.0 * tp / len(gold_set) if gold_set else 0.0

    accuracy = 0.0
    total_tokens = 0
    if sentences is not None:
        by_sent_pred: dict[tuple[str, int], list[CausalMention]] = {}
        by_sent_gold: dict[tuple[str, int], list[CausalMention]] = {}
        for m in pred:
            by_sent_pred.setdefault((m.doc_id, m.sent_index), []).append(m)
        for m in gold:
            by_sent_gold.setdefault((m.doc_id, m.sent_index), []).append(m)
        correct = 0
        for sent in sentences:
            key = (sent.doc_id, sent.sent_index)
            p_tags = to_bio(sent, by_sent_pred.get(key, [])).tags
            g_tags = to_bio(sent, by_sent_gold.get(key, [])).tags
            correct += sum(1 for a, b in zip(p_tags, g_tags) if a == b)
            total_tokens += len(sent)
        accuracy = 100.0 * correct / total_tokens if total_tokens else 0.0

    detail = {
        "accuracy": accuracy,
        "precision": precision,
        "recall": recall,
        "f1": _harmonic(precision, recall),
        "tp": tp,
        "pred": len(pred_set),
        "gold": len(gold_set),
        "tokens": total_tokens,
    }
    return EvalMetrics(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=_harmonic(precision, recall),
        fold_values=[detail],
        repeats=1,
    )


def load_gold(path: str | Path) -> tuple[list[ParsedSentence], list[CausalMention]]:
    """Read token lines "index surface lemma pos head deprel bio".

    Mentions are rebuilt by pairing cause and effect spans in textual order;
    a sentence must contain equally many of each.
    """
    path = Path(path)
    sentences: list[ParsedSentence] = []
    mentions: list[CausalMention] = []
    doc_id = "gold"
    rows: list[tuple[Token, str]] = []
    sent_index = 0

    def flush() -> None:
        nonlocal rows, sent_index
        if not rows:
            return
        sent = ParsedSentence(
            tokens=tuple(t for t, _ in rows), doc_id=doc_id, sent_index=sent_index
        )
        tags = [tag for _, tag in rows]
        try:
            spans = decode_bio(tags)
        except DataError as exc:
            raise DataError(f"{path}: sentence {sent_index}: {exc}") from exc
        if len(spans["cause"]) != len(spans["effect"]):
            raise DataError(
                f"{path}: sentence {sent_index}: unpaired cause/effect spans"
            )
        for cause, effect in zip(spans["cause"], spans["effect"]):
            mentions.append(
                CausalMention(
                    doc_id=doc_id,
                    sent_index=sent_index,
                    cause_span=cause,
                    effect_span=effect,
                    rule_id="gold",
                )
            )
        sentences.append(sent)
        sent_index += 1
        rows = []

    with path.open(encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if line.startswith("# doc_id = "):
                flush()
                doc_id = line[len("# doc_id = "):].strip()
                continue
            if not line or line.startswith("#"):
                flush()
                continue
            parts = line.split("\t")
            if len(parts) != 7:
                raise DataError(f"{path}:{n}: expected 7 tab-separated fields")
            try:
                token = Token(
                    index=int(parts[0]),
                    surface=parts[1],
                    lemma=parts[2],
                    pos=parts[3],
                    head=int(parts[4]),
                    deprel=parts[5],
                )
            except ValueError as exc:
                raise DataError(f"{path}:{n}: malformed token line") from exc
            if parts[6] not in BIO_TAGS:
                raise DataError(f"{path}:{n}: unknown tag {parts[6]!r}")
            rows.append((token, parts[6]))
    flush()
    return sentences, mentions


def save_mentions(mentions: Sequence[CausalMention], path: str | Path) -> None:
    """Persist mentions sorted by position; unresolved events serialize as "-"."""
    ordered = sorted(
        mentions, key=lambda m: (m.doc_id, m.sent_index, m.cause_span, m.effect_span)
    )
    with Path(path).open("w", encoding="utf-8") as fh:
        for m in ordered:
            fh.write(
                "\t".join(
                    [
                        m.doc_id,
                        str(m.sent_index),
                        str(m.cause_span[0]),
                        str(m.cause_span[1]),
                        str(m.effect_span[0]),
                        str(m.effect_span[1]),
                        m.rule_id,
                        m.cause_event or "-",
                        m.effect_event or "-",
                    ]
                )
                + "\n"
            )


def load_mentions(path: str | Path) -> list[CausalMention]:
    out: list[CausalMention] = []
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 9:
                raise DataError(f"{path}:{n}: expected 9 tab-separated fields")
            try:
                out.append(
                    CausalMention(
                        doc_id=parts[0],
                        sent_index=int(parts[1]),
                        cause_span=(int(parts[2]), int(parts[3])),
                        effect_span=(int(parts[4]), int(parts[5])),
                        rule_id=parts[6],
                        cause_event=None if parts[7] == "-" else parts[7],
                        effect_event=None if parts[8] == "-" else parts[8],
                    )
                )
            except ValueError as exc:
                raise DataError(f"{path}:{n}: malformed mention line") from exc
    return out
