"""Extraction of (subject, predicate, object) event tuples from dependency parses.

One event is produced per verbal predicate head. Slot fillers come from the
verb's direct dependents: subject-type and object-type relations fill S and O,
particles extend the trigger, and a configurable set of noun modifiers expands
slot phrases. Adverbial and complement dependents are kept as ``extras`` for
context features but never enter the event key.

Deprel and POS label sets are configuration so UD-style and LTP-style tag
inventories both work.
"""

from __future__ import annotations

import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import ParsedSentence, Token
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class EventTuple:
    """Generalized event with a mandatory trigger predicate.

    Slot lemmas are stored lowercased; the canonical key is "S|P|O" with
    lemmas joined by "_" inside each slot.
    """

    subject: tuple[str, ...]
    predicate: tuple[str, ...]
    object: tuple[str, ...]

    def __post_init__(self):
        if not self.predicate:
            raise ValueError("event predicate must be nonempty")

    @property
    def key(self) -> str:
        return "|".join(
            "_".join(slot) for slot in (self.subject, self.predicate, self.object)
        )

    @classmethod
    def from_key(cls, key: str) -> "EventTuple":
        parts = key.split("|")
        if len(parts) != 3:
            raise ValueError(f"malformed event key {key!r}")
        s, p, o = (tuple(part.split("_")) if part else () for part in parts)
        return cls(subject=s, predicate=p, object=o)


def predicate_of(key: str) -> str:
    """Predicate slot string of a canonical event key."""
    return key.split("|")[1]


def object_of(key: str) -> str:
    """Object slot string of a canonical event key ("" when absent)."""
    parts = key.split("|")
    return parts[2] if len(parts) > 2 else ""


@dataclass(frozen=True)
class EventOccurrence:
    event: str  # canonical EventTuple key
    doc_id: str
    sent_index: int
    token_span: tuple[int, int]  # 0-based inclusive positions in the sentence
    pred_index: int  # 0-based position of the trigger head
    extras: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExtractionConfig:
    subject_deprels: frozenset[str] = frozenset({"nsubj", "subj", "SBV"})
    object_deprels: frozenset[str] = frozenset({"obj", "dobj", "VOB"})
    modifier_deprels: frozenset[str] = frozenset({"compound", "nn", "flat", "amod", "ATT"})
    particle_deprels: frozenset[str] = frozenset({"compound:prt", "prt"})
    conj_deprels: frozenset[str] = frozenset({"conj", "COO"})
    extra_deprels: frozenset[str] = frozenset({"advmod", "obl", "xcomp", "ccomp", "ADV", "CMP"})
    verb_pos: frozenset[str] = frozenset(
        {"VERB", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "VV", "v"}
    )


DEFAULT_EXTRACTION = ExtractionConfig()


def _slot_phrase(head: Token, children: dict[int, list[Token]], config: ExtractionConfig) -> list[Token]:
    mods = [c for c in children[head.index] if c.deprel in config.modifier_deprels]
    return sorted(mods + [head], key=lambda t: t.index)


def extract_events(
    sentence: ParsedSentence, config: ExtractionConfig = DEFAULT_EXTRACTION
) -> list[EventOccurrence]:
    """Extract one occurrence per verbal predicate head, in token order.

    A verb conjoined to another verb inherits that verb's subject when it has
    none of its own. Events with both S and O empty are kept only when the
    trigger is a multi-lemma compound.
    """
    tokens = sentence.tokens
    children: dict[int, list[Token]] = defaultdict(list)
    for t in tokens:
        children[t.head].append(t)

    occurrences: list[EventOccurrence] = []
    for verb in tokens:
        if verb.pos not in config.verb_pos:
            continue

        particles = [c for c in children[verb.index] if c.deprel in config.particle_deprels]
        pred_tokens = sorted(particles + [verb], key=lambda t: t.index)

        subj_heads = [c for c in children[verb.index] if c.deprel in config.subject_deprels]
        if not subj_heads:
            # subject inheritance along the conjunction chain
            anc = verb
            while not subj_heads and anc.deprel in config.conj_deprels and anc.head != 0:
                anc = tokens[anc.head - 1]
                subj_heads = [
                    c for c in children[anc.index] if c.deprel in config.subject_deprels
                ]
        obj_heads = [c for c in children[verb.index] if c.deprel in config.object_deprels]

        subj_tokens: list[Token] = []
        for h in sorted(subj_heads, key=lambda t: t.index):
            subj_tokens.extend(_slot_phrase(h, children, config))
        obj_tokens: list[Token] = []
        for h in sorted(obj_heads, key=lambda t: t.index):
            obj_tokens.extend(_slot_phrase(h, children, config))

        event = EventTuple(
            subject=tuple(t.lemma.lower() for t in subj_tokens),
            predicate=tuple(t.lemma.lower() for t in pred_tokens),
            object=tuple(t.lemma.lower() for t in obj_tokens),
        )
        # semantic completeness: a bare single-lemma trigger is too vague
        if not event.subject and not event.object and len(event.predicate) < 2:
            continue

        span_tokens = pred_tokens + subj_tokens + obj_tokens
        span = (min(t.index for t in span_tokens) - 1, max(t.index for t in span_tokens) - 1)
        extras = tuple(
            c.lemma.lower()
            for c in sorted(children[verb.index], key=lambda t: t.index)
            if c.deprel in config.extra_deprels
        )
        occurrences.append(
            EventOccurrence(
                event=event.key,
                doc_id=sentence.doc_id,
                sent_index=sentence.sent_index,
                token_span=span,
                pred_index=verb.index - 1,
                extras=extras,
            )
        )
    return occurrences


def extract_corpus_events(
    corpus, config: ExtractionConfig = DEFAULT_EXTRACTION
) -> list[EventOccurrence]:
    """Extract events for every sentence of a corpus, in corpus order."""
    out: list[EventOccurrence] = []
    for sentence in corpus.iter_sentences():
        out.extend(extract_events(sentence, config))
    return out


def filter_low_frequency(
    occurrences: list[EventOccurrence], threshold: int
) -> list[EventOccurrence]:
    """Keep only occurrences of events seen at least ``threshold`` times.

    Frequencies are computed over the input list itself.
    """
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    counts = Counter(o.event for o in occurrences)
    return [o for o in occurrences if counts[o.event] >= threshold]


class GeneralityBlacklist:
    """Patterns for removing over-general events.

    Entry kinds: exact canonical keys, predicate-slot strings, and regexes
    over the canonical key.
    """

    def __init__(
        self,
        keys: Iterable[str] = (),
        predicates: Iterable[str] = (),
        regexes: Iterable[str] = (),
    ):
        self.keys = frozenset(keys)
        self.predicates = frozenset(predicates)
        compiled = []
        for r in regexes:
            try:
                compiled.append(re.compile(r))
            except re.error as exc:
                raise ConfigError(f"bad blacklist regex {r!r}: {exc}") from exc
        self.regexes = tuple(compiled)

    def matches(self, key: str) -> bool:
        if key in self.keys:
            return True
        if predicate_of(key) in self.predicates:
            return True
        return any(r.search(key) for r in self.regexes)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "GeneralityBlacklist":
        keys, preds, regexes = [], [], []
        for n, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise ConfigError(f"blacklist line {n}: expected kind:value, got {line!r}")
            kind, value = line.split(":", 1)
            if kind == "key":
                keys.append(value)
            elif kind == "pred":
                preds.append(value)
            elif kind == "re":
                regexes.append(value)
            else:
                raise ConfigError(f"blacklist line {n}: unknown kind {kind!r}")
        return cls(keys=keys, predicates=preds, regexes=regexes)


def default_blacklist_path() -> Path:
    return Path(__file__).parent / "resources" / "blacklist.txt"


def load_blacklist(path: str | Path) -> GeneralityBlacklist:
    with Path(path).open(encoding="utf-8") as fh:
        return GeneralityBlacklist.from_lines(fh)


def filter_general(
    occurrences: list[EventOccurrence], blacklist: GeneralityBlacklist
) -> list[EventOccurrence]:
    """Remove occurrences whose event key matches the generality blacklist."""
    return [o for o in occurrences if not blacklist.matches(o.event)]


def save_occurrences(occurrences: Sequence[EventOccurrence], path: str | Path) -> None:
    """Persist occurrences in document order as a tab-separated artifact."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for o in occurrences:
            extras = json.dumps(list(o.extras), ensure_ascii=False)
            fh.write(
                f"{o.event}\t{o.doc_id}\t{o.sent_index}"
                f"\t{o.token_span[0]}\t{o.token_span[1]}\t{o.pred_index}\t{extras}\n"
            )


def load_occurrences(path: str | Path) -> list[EventOccurrence]:
    out: list[EventOccurrence] = []
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 7:
                raise DataError(f"{path}:{n}: expected 7 tab-separated fields")
            try:
                extras = json.loads(parts[6])
                if not isinstance(extras, list):
                    raise ValueError("extras must be a list")
                out.append(
                    EventOccurrence(
                        event=parts[0],
                        doc_id=parts[1],
                        sent_index=int(parts[2]),
                        token_span=(int(parts[3]), int(parts[4])),
                        pred_index=int(parts[5]),
                        extras=tuple(str(x) for x in extras),
                    )
                )
            except (ValueError, json.JSONDecodeError) as exc:
                raise DataError(f"{path}:{n}: malformed occurrence line") from exc
    return out
