"""Two-annotator agreement: Cohen's kappa, agreement matrices, disagreements.

Kappa is chance-corrected agreement (p_o - p_e) / (1 - p_e), where p_o is the
fraction of items both annotators labeled identically and p_e is the expected
agreement under independent labeling with each annotator's marginals. When
p_e = 1 (both annotators constant on the same label) kappa has no value and
``cohen_kappa`` raises instead of returning a sentinel.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .corpus import CATEGORIES, LabeledCorpus, collapse
from .errors import KappaUndefinedError, ValidationError


@dataclass(frozen=True)
class AnnotationPair:
    """Aligned labels from two annotators over the same items."""

    items: tuple[tuple[str, str, str], ...]  # (item id, label_a, label_b)
    label_domain: frozenset[str]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for item_id, label_a, label_b in self.items:
            if item_id in seen:
                raise ValidationError(f"duplicate item id {item_id!r}")
            seen.add(item_id)
            for label in (label_a, label_b):
                if label not in self.label_domain:
                    raise ValidationError(
                        f"label {label!r} on item {item_id!r} not in label domain"
                    )

    @property
    def n_items(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    n_items: int


def cohen_kappa(pair: AnnotationPair) -> KappaResult:
    """Cohen's kappa for a two-annotator labeling.

    Raises ValueError on an empty item list and KappaUndefinedError when
    expected agreement is exactly 1.
    """
    n = pair.n_items
    if n == 0:
        raise ValueError("cannot compute kappa over zero items")
    agree = sum(1 for _, a, b in pair.items if a == b)
    counts_a = Counter(a for _, a, _ in pair.items)
    counts_b = Counter(b for _, _, b in pair.items)
    # Integer numerators keep the p_e = 1 test exact.
    expected_num = sum(counts_a[k] * counts_b[k] for k in counts_a)
    if expected_num == n * n:
        raise KappaUndefinedError(
            "expected agreement is 1 (both annotators constant on one label); "
            "kappa is undefined"
        )
    observed = agree / n
    expected = expected_num / (n * n)
    kappa = (observed - expected) / (1.0 - expected)
    return KappaResult(kappa, observed, expected, n)


def agreement_matrix(pair: AnnotationPair) -> dict[str, dict[str, int]]:
    """Count matrix: cell (k, l) counts items labeled k by A and l by B.

    Rows and columns cover the full label domain in sorted order, zero-filled.
    """
    labels = sorted(pair.label_domain)
    matrix = {a: {b: 0 for b in labels} for a in labels}
    for _, label_a, label_b in pair.items:
        matrix[label_a][label_b] += 1
    return matrix


def disagreements(pair: AnnotationPair) -> list[tuple[str, str, str]]:
    """Items the annotators labeled differently, in input order."""
    return [(i, a, b) for i, a, b in pair.items if a != b]


def pair_from_corpus(corpus: LabeledCorpus, annotator_a: str, annotator_b: str,
                     collapsed: bool = True) -> AnnotationPair:
    """Build an AnnotationPair from two annotators' labels in a corpus.

    Items are the tweets both annotators labeled, in corpus tweet order.
    By default labels are collapsed categories; with ``collapsed=False`` the
    fine codes themselves are compared.
    """
    labels_a = {a.tweet_id: a.fine_code for a in corpus.annotations
                if a.annotator_id == annotator_a}
    labels_b = {a.tweet_id: a.fine_code for a in corpus.annotations
                if a.annotator_id == annotator_b}
    items = []
    for tweet in corpus.tweets:
        if tweet.id in labels_a and tweet.id in labels_b:
            code_a, code_b = labels_a[tweet.id], labels_b[tweet.id]
            if collapsed:
                code_a = collapse(code_a, corpus.codebook)
                code_b = collapse(code_b, corpus.codebook)
            items.append((tweet.id, code_a, code_b))
    domain = frozenset(CATEGORIES) if collapsed else corpus.codebook.fine_codes
    return AnnotationPair(tuple(items), domain)
