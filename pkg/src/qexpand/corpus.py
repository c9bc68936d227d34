"""Offline occurrence source: a document-level inverted index.

Frequencies are document-level (a term counts once per document) to mirror
the hit counts reported by web search engines. Tokenization is lowercase
with splits on non-alphanumeric runs and no stemming; multi-word terms are
counted as the AND-conjunction of their tokens.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import DomainError

# Unicode letters and digits; underscore excluded on purpose.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class DocRecord:
    """One corpus document."""

    id: str
    text: str


class CorpusIndex:
    """Immutable after build; concurrent readers are safe."""

    def __init__(
        self,
        postings: dict[str, set[str]],
        m: int,
        tokenizer: Callable[[str], list[str]] = tokenize,
    ):
        self._postings = postings
        self._m = m
        self._tokenizer = tokenizer

    @property
    def m(self) -> int:
        """Total number of ingested documents."""
        return self._m

    def vocabulary(self) -> set[str]:
        return set(self._postings)

    def matching(self, terms: Iterable[str]) -> set[str]:
        """Document ids containing every token of every given term."""
        tokens: list[str] = []
        for term in terms:
            tokens.extend(self._tokenizer(term))
        if not tokens:
            return set()
        docs: set[str] | None = None
        for tok in tokens:
            posting = self._postings.get(tok)
            if not posting:
                return set()
            docs = set(posting) if docs is None else docs & posting
            if not docs:
                return set()
        return docs if docs is not None else set()

    def doc_freq(self, term: str) -> int:
        """Number of documents containing the term (AND over its tokens)."""
        return len(self.matching([term]))

    def pair_doc_freq(self, x: str, y: str) -> int:
        """Number of documents containing both terms. Symmetric."""
        return len(self.matching([x, y]))

    def cond_prob(self, target: str, given: Sequence[str] | set[str]) -> float:
        """P(target | all of given), document-level.

        Raises DomainError when no document matches the conditioning set.
        """
        given = list(given)
        if not given:
            raise DomainError("conditioning set must be non-empty")
        support = self.matching(given)
        if not support:
            raise DomainError(
                f"zero-support condition: no document contains all of {sorted(given)}"
            )
        joint = support & self.matching([target])
        return len(joint) / len(support)

    def save(self, path: str | Path) -> None:
        payload = {
            "m": self._m,
            "postings": {t: sorted(ids) for t, ids in sorted(self._postings.items())},
        }
        Path(path).write_text(
            json.dumps(payload, ensure_ascii=False, sort_keys=True), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "CorpusIndex":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        postings = {t: set(ids) for t, ids in payload["postings"].items()}
        return cls(postings=postings, m=int(payload["m"]))


def build_index(
    docs: Sequence[DocRecord],
    tokenizer: Callable[[str], list[str]] = tokenize,
) -> CorpusIndex:
    """Index a corpus. Document ids must be unique."""
    postings: dict[str, set[str]] = {}
    seen: set[str] = set()
    for doc in docs:
        if doc.id in seen:
            raise DomainError(f"duplicate document id: {doc.id!r}")
        seen.add(doc.id)
        for tok in set(tokenizer(doc.text)):
            postings.setdefault(tok, set()).add(doc.id)
    return CorpusIndex(postings=postings, m=len(docs), tokenizer=tokenizer)


def read_corpus(path: str | Path) -> list[DocRecord]:
    """Read a corpus from a directory of text files or a TAB-separated file.

    Directory: every regular file becomes one document, id = relative path.
    File: each non-empty line is `id<TAB>text`.
    """
    path = Path(path)
    if path.is_dir():
        docs = []
        for file in sorted(p for p in path.rglob("*") if p.is_file()):
            if file.name.startswith("."):
                continue
            docs.append(
                DocRecord(id=file.relative_to(path).as_posix(), text=file.read_text(encoding="utf-8"))
            )
        return docs
    docs = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise DomainError(f"{path}: line {lineno}: expected 'id<TAB>text'")
        doc_id, text = line.split("\t", 1)
        docs.append(DocRecord(id=doc_id, text=text))
    return docs
