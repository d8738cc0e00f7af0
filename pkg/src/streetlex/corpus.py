"""Corpus data model, Twitter-aware tokenization, codebooks, and file formats.

Tokens carry exact half-open character spans into the source text, so a tweet
can always be reconstructed from its tokens plus the whitespace between them.
All values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime
from functools import cached_property
from typing import IO, Iterable, Optional

from .errors import ParseError, ValidationError

# The three collapsed categories, in fixed priority order.
AGGRESSION = "aggression"
GRIEF = "grief"
OTHER = "other"
CATEGORIES = (AGGRESSION, GRIEF, OTHER)

# Token kinds, named after the classification precedence order.
KIND_WORD = "word"
KIND_HASHTAG = "hashtag"
KIND_MENTION = "mention"
KIND_URL = "url"
KIND_EMOTICON = "emoticon"
KIND_EMOJI = "emoji"
KIND_NUMERAL = "numeral"
KIND_PUNCTUATION = "punctuation"
TOKEN_KINDS = frozenset(
    {KIND_WORD, KIND_HASHTAG, KIND_MENTION, KIND_URL,
     KIND_EMOTICON, KIND_EMOJI, KIND_NUMERAL, KIND_PUNCTUATION}
)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tweet:
    """One social-media post. ``created_at`` must be timezone-aware."""

    id: str
    author: str
    created_at: datetime
    text: str
    reply_to: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("tweet id must be nonempty")
        if not self.text:
            raise ValueError(f"tweet {self.id!r}: text must be nonempty")
        if self.created_at.tzinfo is None:
            raise ValueError(f"tweet {self.id!r}: naive timestamp rejected")


@dataclass(frozen=True)
class Token:
    """A tokenizer output unit: surface string, source span, and kind."""

    surface: str
    span: tuple[int, int]
    kind: str

    def __post_init__(self) -> None:
        start, end = self.span
        if not (0 <= start < end):
            raise ValueError(f"bad token span {self.span}")
        if end - start != len(self.surface):
            raise ValueError(f"span {self.span} does not cover {self.surface!r}")
        if self.kind not in TOKEN_KINDS:
            raise ValueError(f"unknown token kind {self.kind!r}")
        if any(ch.isspace() for ch in self.surface):
            raise ValueError(f"whitespace inside token {self.surface!r}")
        if self.kind == KIND_HASHTAG and not self.surface.startswith("#"):
            raise ValueError(f"hashtag token {self.surface!r} must start with '#'")
        if self.kind == KIND_MENTION and not self.surface.startswith("@"):
            raise ValueError(f"mention token {self.surface!r} must start with '@'")


@dataclass(frozen=True)
class Codebook:
    """Fine-code inventory plus the total map onto the collapsed categories."""

    collapse_map: dict[str, str]

    def __post_init__(self) -> None:
        for code, category in self.collapse_map.items():
            if not code:
                raise ValueError("empty fine code name")
            if category not in CATEGORIES:
                raise ValueError(
                    f"fine code {code!r} maps to {category!r}, "
                    f"expected one of {', '.join(CATEGORIES)}"
                )

    @property
    def fine_codes(self) -> frozenset[str]:
        return frozenset(self.collapse_map)


@dataclass(frozen=True)
class DuvaaContext:
    """Optional qualitative-coding context carried alongside an annotation."""

    precipitating_event: Optional[str] = None
    author_profile: Optional[str] = None
    content: Optional[str] = None
    clues: Optional[str] = None
    tone: Optional[str] = None
    trigger_event: Optional[str] = None


@dataclass(frozen=True)
class Annotation:
    """A single annotator's fine-code label for one tweet."""

    tweet_id: str
    annotator_id: str
    fine_code: str
    duvaa_context: Optional[DuvaaContext] = None


@dataclass(frozen=True)
class LabeledCorpus:
    """Tweets, their annotations, and the codebook governing the codes.

    Construction validates referential integrity: unique tweet ids, every
    annotation resolving to a tweet, every fine code known to the codebook,
    and at most one annotation per (tweet, annotator).
    """

    tweets: tuple[Tweet, ...]
    annotations: tuple[Annotation, ...]
    codebook: Codebook

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for tweet in self.tweets:
            if tweet.id in seen:
                raise ValidationError(f"duplicate tweet id {tweet.id!r}")
            seen.add(tweet.id)
        keys: set[tuple[str, str]] = set()
        for ann in self.annotations:
            if ann.tweet_id not in seen:
                raise ValidationError(
                    f"annotation references unknown tweet id {ann.tweet_id!r}"
                )
            if ann.fine_code not in self.codebook.collapse_map:
                raise ValidationError(
                    f"fine code {ann.fine_code!r} absent from codebook"
                )
            key = (ann.tweet_id, ann.annotator_id)
            if key in keys:
                raise ValidationError(
                    f"duplicate annotation for tweet {ann.tweet_id!r} "
                    f"by annotator {ann.annotator_id!r}"
                )
            keys.add(key)

    @cached_property
    def by_id(self) -> dict[str, Tweet]:
        return {tweet.id: tweet for tweet in self.tweets}

    def annotations_for(self, tweet_id: str) -> tuple[Annotation, ...]:
        return tuple(a for a in self.annotations if a.tweet_id == tweet_id)


def default_codebook() -> Codebook:
    """A starter codebook for the aggression/grief/other scheme.

    This is a deliberately partial inventory: real deployments carry their
    own, larger codebooks in the TSV format read by ``read_codebook``.
    """
    return Codebook({
        "aggression": AGGRESSION,
        "threats": AGGRESSION,
        "insults": AGGRESSION,
        "bragging": AGGRESSION,
        "hypervigilance": AGGRESSION,
        "authority-challenge": AGGRESSION,
        "grief": GRIEF,
        "distress": GRIEF,
        "sadness": GRIEF,
        "loneliness": GRIEF,
        "death": GRIEF,
        "general-conversation": OTHER,
        "women": OTHER,
        "happiness": OTHER,
        "money": OTHER,
        "relationships": OTHER,
    })


def collapse(code: str, codebook: Codebook) -> str:
    """Map a fine code to its collapsed category."""
    try:
        return codebook.collapse_map[code]
    except KeyError:
        raise ValidationError(f"unknown fine code {code!r}") from None


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_URL_RE = re.compile(r"https?://\S+")
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#\w+")

# Closed emoticon inventory: eyes x optional nose x mouth, plus a fixed list
# of extras. The final mouth character may repeat (":)))", "<333").
_EYES = ":;="
_NOSES = ("", "-", "'")
_MOUTHS = ")(DPpd/\\|][Oo0*3Ss"
_EXTRA_EMOTICONS = (
    "<3", "</3", "^_^", "-_-", "o_o", "o_O", "O_o", "O_O",
    "T_T", "x_x", "._.", ">_<", ";_;", "D:", "(:", "):",
)
EMOTICONS = frozenset(
    eye + nose + mouth for eye in _EYES for nose in _NOSES for mouth in _MOUTHS
) | frozenset(_EXTRA_EMOTICONS)
_EMOTICON_PATTERNS = tuple(sorted(EMOTICONS, key=lambda p: (-len(p), p)))
_REPEATABLE_TAILS = frozenset(_MOUTHS) | {"3", "<"}

# Emoji inventory by Unicode block. Modifier characters (variation selectors,
# skin tones, keycap, ZWJ continuations) are absorbed into the base token.
_EMOJI_RANGES = (
    (0x1F1E6, 0x1F1FF),  # regional indicators
    (0x1F300, 0x1F5FF),  # misc symbols and pictographs
    (0x1F600, 0x1F64F),  # emoticon pictographs
    (0x1F680, 0x1F6FF),  # transport and map
    (0x1F900, 0x1F9FF),  # supplemental symbols and pictographs
    (0x1FA70, 0x1FAFF),  # symbols and pictographs extended-A
    (0x2600, 0x26FF),    # miscellaneous symbols
    (0x2700, 0x27BF),    # dingbats
    (0x2B00, 0x2BFF),    # arrows, stars, squares
)
_EMOJI_MODIFIERS = frozenset({0xFE0E, 0xFE0F, 0x20E3})
_SKIN_TONES = (0x1F3FB, 0x1F3FF)
_ZWJ = 0x200D


def _is_emoji_base(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


def _is_emoji_modifier(ch: str) -> bool:
    cp = ord(ch)
    return cp in _EMOJI_MODIFIERS or _SKIN_TONES[0] <= cp <= _SKIN_TONES[1]


def _is_word_char(ch: str) -> bool:
    return ch == "_" or unicodedata.category(ch)[0] in "LMN"


def _match_emoticon(text: str, i: int) -> int | None:
    """Return the end offset of an emoticon starting at ``i``, if any."""
    for pattern in _EMOTICON_PATTERNS:
        if not text.startswith(pattern, i):
            continue
        j = i + len(pattern)
        tail = pattern[-1]
        if tail in _REPEATABLE_TAILS:
            while j < len(text) and text[j] == tail:
                j += 1
        if j < len(text) and text[j].isalnum():
            continue  # ":Drive" is not an emoticon
        return j
    return None


def _match_emoji(text: str, i: int) -> int | None:
    if not _is_emoji_base(text[i]):
        return None
    j = i + 1
    while j < len(text):
        if _is_emoji_modifier(text[j]):
            j += 1
        elif (ord(text[j]) == _ZWJ and j + 1 < len(text)
              and _is_emoji_base(text[j + 1])):
            j += 2  # joined sequences stay one token
        else:
            break
    return j


def _match_numeral(text: str, i: int) -> int | None:
    if not text[i].isdigit():
        return None
    j = i + 1
    while j < len(text):
        if text[j].isdigit():
            j += 1
        elif (text[j] in ".,:/" and j + 1 < len(text)
              and text[j + 1].isdigit()):
            j += 2
        else:
            break
    return j


def _match_word(text: str, i: int) -> int | None:
    ch = text[i]
    if not (ch == "_" or unicodedata.category(ch)[0] == "L"):
        return None
    j = i + 1
    while j < len(text):
        if _is_word_char(text[j]):
            j += 1
        elif (text[j] in "'’-" and j + 1 < len(text)
              and _is_word_char(text[j + 1])):
            j += 2
        else:
            break
    return j


def tokenize(text: str) -> list[Token]:
    """Split text into span-preserving tokens.

    Classification precedence at each position is url > mention > hashtag >
    emoticon > emoji > numeral > punctuation > word; whitespace separates
    tokens and is never part of one. Total function: any character that no
    earlier rule claims becomes a punctuation token (a run of that same
    character).
    """
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        kind = KIND_PUNCTUATION
        m = _URL_RE.match(text, i)
        if m is not None:
            j, kind = m.end(), KIND_URL
        elif (m := _MENTION_RE.match(text, i)) is not None:
            j, kind = m.end(), KIND_MENTION
        elif (m := _HASHTAG_RE.match(text, i)) is not None:
            j, kind = m.end(), KIND_HASHTAG
        elif (end := _match_emoticon(text, i)) is not None:
            j, kind = end, KIND_EMOTICON
        elif (end := _match_emoji(text, i)) is not None:
            j, kind = end, KIND_EMOJI
        elif (end := _match_numeral(text, i)) is not None:
            j, kind = end, KIND_NUMERAL
        elif (end := _match_word(text, i)) is not None:
            j, kind = end, KIND_WORD
        else:
            j = i + 1
            while j < n and text[j] == text[i]:
                j += 1
        tokens.append(Token(text[i:j], (i, j), kind))
        i = j
    return tokens


def classify_surface(surface: str) -> str:
    """Kind of a standalone surface form; ``word`` when nothing fully matches."""
    if not surface or any(ch.isspace() for ch in surface):
        return KIND_WORD
    toks = tokenize(surface)
    if len(toks) == 1 and toks[0].span == (0, len(surface)):
        return toks[0].kind
    return KIND_WORD


def token_from_surface(surface: str, start: int = 0) -> Token:
    """Build a Token for a surface detached from any source text."""
    return Token(surface, (start, start + len(surface)), classify_surface(surface))


# ---------------------------------------------------------------------------
# Timestamps
# ---------------------------------------------------------------------------

def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive timestamps are rejected."""
    raw = value.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        stamp = datetime.fromisoformat(raw)
    except ValueError:
        raise ValueError(f"unparseable ISO-8601 timestamp {value!r}") from None
    if stamp.tzinfo is None:
        raise ValueError(f"naive timestamp rejected: {value!r}")
    return stamp


# ---------------------------------------------------------------------------
# Ingestion and serialization
# ---------------------------------------------------------------------------

_TWEET_KEYS = {"id", "author", "created_at", "text", "reply_to"}
_ANNOTATION_KEYS = {"tweet_id", "annotator_id", "fine_code", "duvaa"}
_DUVAA_KEYS = ("precipitating_event", "author_profile", "content",
               "clues", "tone", "trigger_event")

FORMAT_JSONL = "jsonl"
FORMAT_TSV = "tsv"


def _decode_lines(stream: IO[bytes]) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(stream, start=1):
        yield lineno, raw.decode("utf-8")


def _tweet_from_obj(obj: dict, lineno: int, path: str | None) -> Tweet:
    if not isinstance(obj, dict):
        raise ParseError("record is not an object", path=path, line=lineno)
    unknown = set(obj) - _TWEET_KEYS
    if unknown:
        raise ParseError(f"unknown keys {sorted(unknown)}", path=path, line=lineno)
    try:
        return Tweet(
            id=str(obj["id"]),
            author=str(obj.get("author", "")),
            created_at=parse_timestamp(str(obj["created_at"])),
            text=str(obj["text"]),
            reply_to=None if obj.get("reply_to") is None else str(obj["reply_to"]),
        )
    except KeyError as exc:
        raise ParseError(f"missing key {exc.args[0]!r}", path=path, line=lineno) from None
    except ValueError as exc:
        raise ParseError(str(exc), path=path, line=lineno) from None


_TSV_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}


def _tsv_escape(value: str) -> str:
    return "".join(_TSV_ESCAPES.get(ch, ch) for ch in value)


def _tsv_unescape(value: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\" and i + 1 < len(value):
            nxt = value[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def read_tweets(stream: IO[bytes], format: str = FORMAT_JSONL,
                path: str | None = None) -> list[Tweet]:
    """Read tweets from a JSONL or TSV byte stream."""
    tweets: list[Tweet] = []
    if format == FORMAT_JSONL:
        for lineno, line in _decode_lines(stream):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON: {exc.msg}", path=path, line=lineno) from None
            tweets.append(_tweet_from_obj(obj, lineno, path))
    elif format == FORMAT_TSV:
        for lineno, line in _decode_lines(stream):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise ParseError(f"expected 5 columns, got {len(cols)}",
                                 path=path, line=lineno)
            tid, author, created_at, text, reply_to = (_tsv_unescape(c) for c in cols)
            try:
                tweets.append(Tweet(tid, author, parse_timestamp(created_at),
                                    text, reply_to or None))
            except ValueError as exc:
                raise ParseError(str(exc), path=path, line=lineno) from None
    else:
        raise ValueError(f"unknown corpus format {format!r}")
    return tweets


def read_annotations(stream: IO[bytes], path: str | None = None) -> list[Annotation]:
    """Read annotation JSONL: tweet_id, annotator_id, fine_code, optional duvaa."""
    annotations: list[Annotation] = []
    for lineno, line in _decode_lines(stream):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", path=path, line=lineno) from None
        if not isinstance(obj, dict):
            raise ParseError("record is not an object", path=path, line=lineno)
        unknown = set(obj) - _ANNOTATION_KEYS
        if unknown:
            raise ParseError(f"unknown keys {sorted(unknown)}", path=path, line=lineno)
        duvaa = None
        if obj.get("duvaa") is not None:
            raw = obj["duvaa"]
            if not isinstance(raw, dict) or set(raw) - set(_DUVAA_KEYS):
                raise ParseError("malformed duvaa object", path=path, line=lineno)
            duvaa = DuvaaContext(**{k: raw.get(k) for k in _DUVAA_KEYS})
        try:
            annotations.append(Annotation(
                tweet_id=str(obj["tweet_id"]),
                annotator_id=str(obj["annotator_id"]),
                fine_code=str(obj["fine_code"]),
                duvaa_context=duvaa,
            ))
        except KeyError as exc:
            raise ParseError(f"missing key {exc.args[0]!r}", path=path, line=lineno) from None
    return annotations


def read_codebook(stream: IO[bytes], path: str | None = None) -> Codebook:
    """Read codebook TSV: ``fine_code<TAB>category``; '#' lines are comments."""
    mapping: dict[str, str] = {}
    for lineno, line in _decode_lines(stream):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise ParseError(f"expected 2 columns, got {len(cols)}",
                             path=path, line=lineno)
        code, category = cols[0].strip(), cols[1].strip()
        if category not in CATEGORIES:
            raise ParseError(
                f"fine code {code!r} maps to {category!r}, "
                f"expected one of {', '.join(CATEGORIES)}",
                path=path, line=lineno)
        mapping[code] = category
    return Codebook(mapping)


def ingest_corpus(tweets: IO[bytes], format: str = FORMAT_JSONL,
                  annotations: IO[bytes] | None = None,
                  codebook: Codebook | None = None,
                  path: str | None = None) -> LabeledCorpus:
    """Assemble and validate a LabeledCorpus from byte streams.

    ``codebook`` defaults to an empty codebook, so passing annotations
    without one fails with an unknown-code error.
    """
    tweet_list = read_tweets(tweets, format, path=path)
    ann_list = read_annotations(annotations) if annotations is not None else []
    book = codebook if codebook is not None else Codebook({})
    return LabeledCorpus(tuple(tweet_list), tuple(ann_list), book)


def write_tweets(tweets: Iterable[Tweet], stream: IO[bytes],
                 format: str = FORMAT_JSONL) -> None:
    if format == FORMAT_JSONL:
        for tweet in tweets:
            obj = {
                "id": tweet.id,
                "author": tweet.author,
                "created_at": tweet.created_at.isoformat(),
                "text": tweet.text,
            }
            if tweet.reply_to is not None:
                obj["reply_to"] = tweet.reply_to
            stream.write(json.dumps(obj, ensure_ascii=False, sort_keys=True).encode("utf-8"))
            stream.write(b"\n")
    elif format == FORMAT_TSV:
        for tweet in tweets:
            cols = (tweet.id, tweet.author, tweet.created_at.isoformat(),
                    tweet.text, tweet.reply_to or "")
            stream.write("\t".join(_tsv_escape(c) for c in cols).encode("utf-8"))
            stream.write(b"\n")
    else:
        raise ValueError(f"unknown corpus format {format!r}")


def write_annotations(annotations: Iterable[Annotation], stream: IO[bytes]) -> None:
    for ann in annotations:
        obj: dict = {
            "tweet_id": ann.tweet_id,
            "annotator_id": ann.annotator_id,
            "fine_code": ann.fine_code,
        }
        if ann.duvaa_context is not None:
            duvaa = {k: getattr(ann.duvaa_context, k) for k in _DUVAA_KEYS
                     if getattr(ann.duvaa_context, k) is not None}
            obj["duvaa"] = duvaa
        stream.write(json.dumps(obj, ensure_ascii=False, sort_keys=True).encode("utf-8"))
        stream.write(b"\n")


def write_codebook(codebook: Codebook, stream: IO[bytes]) -> None:
    for code in sorted(codebook.collapse_map):
        stream.write(f"{code}\t{codebook.collapse_map[code]}\n".encode("utf-8"))


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------

def window_filter(corpus: LabeledCorpus, start: datetime, end: datetime) -> LabeledCorpus:
    """Restrict a corpus to tweets with ``start <= created_at < end``."""
    if start.tzinfo is None or end.tzinfo is None:
        raise ValueError("window bounds must be timezone-aware")
    if start > end:
        raise ValueError(f"window start {start.isoformat()} is after end {end.isoformat()}")
    kept = tuple(t for t in corpus.tweets if start <= t.created_at < end)
    ids = {t.id for t in kept}
    anns = tuple(a for a in corpus.annotations if a.tweet_id in ids)
    return LabeledCorpus(kept, anns, corpus.codebook)
