"""Porter suffix-stripping stemmer (the original published algorithm).

Implements the five-step rule cascade exactly as published: measure-based
conditions, longest-suffix match within a step, and the convention that a
matched suffix whose condition fails blocks the rest of the step.  Words
of length <= 2 are returned unchanged.
"""

from __future__ import annotations

_VOWELS = set("aeiou")


def _is_consonant(word, i):
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem):
    """Number of vowel-consonant sequences in [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        if _is_consonant(stem, i):
            if prev_vowel:
                m += 1
            prev_vowel = False
        else:
            prev_vowel = True
    return m


def _has_vowel(stem):
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(stem):
    return (len(stem) >= 2 and stem[-1] == stem[-2]
            and _is_consonant(stem, len(stem) - 1))


def _ends_cvc(stem):
    # consonant-vowel-consonant where the final consonant is not w, x or y
    if len(stem) < 3:
        return False
    return (_is_consonant(stem, len(stem) - 3)
            and not _is_consonant(stem, len(stem) - 2)
            and _is_consonant(stem, len(stem) - 1)
            and stem[-1] not in "wxy")


def _apply_rules(word, rules):
    """First rule whose suffix matches wins; its condition gates the rewrite."""
    for suffix, replacement, condition in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if condition is None or condition(stem):
                return stem + replacement
            return word
    return word


def _step1a(word):
    return _apply_rules(word, [
        ("sses", "ss", None),
        ("ies", "i", None),
        ("ss", "ss", None),
        ("s", "", None),
    ])


def _step1b(word):
    if word.endswith("eed"):
        stem = word[:-3]
        return stem + "ee" if _measure(stem) > 0 else word
    for suffix in ("ed", "ing"):
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if not _has_vowel(stem):
                return word
            return _step1b_cleanup(stem)
    return word


def _step1b_cleanup(stem):
    if stem.endswith(("at", "bl", "iz")):
        return stem + "e"
    if _ends_double_consonant(stem) and stem[-1] not in "lsz":
        return stem[:-1]
    if _measure(stem) == 1 and _ends_cvc(stem):
        return stem + "e"
    return stem


def _step1c(word):
    if word.endswith("y") and _has_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


_M_POSITIVE = lambda stem: _measure(stem) > 0
_M_GT_ONE = lambda stem: _measure(stem) > 1

_STEP2_RULES = [
    ("ational", "ate", _M_POSITIVE),
    ("tional", "tion", _M_POSITIVE),
    ("enci", "ence", _M_POSITIVE),
    ("anci", "ance", _M_POSITIVE),
    ("izer", "ize", _M_POSITIVE),
    ("abli", "able", _M_POSITIVE),
    ("alli", "al", _M_POSITIVE),
    ("entli", "ent", _M_POSITIVE),
    ("eli", "e", _M_POSITIVE),
    ("ousli", "ous", _M_POSITIVE),
    ("ization", "ize", _M_POSITIVE),
    ("ation", "ate", _M_POSITIVE),
    ("ator", "ate", _M_POSITIVE),
    ("alism", "al", _M_POSITIVE),
    ("iveness", "ive", _M_POSITIVE),
    ("fulness", "ful", _M_POSITIVE),
    ("ousness", "ous", _M_POSITIVE),
    ("aliti", "al", _M_POSITIVE),
    ("iviti", "ive", _M_POSITIVE),
    ("biliti", "ble", _M_POSITIVE),
]

_STEP3_RULES = [
    ("icate", "ic", _M_POSITIVE),
    ("ative", "", _M_POSITIVE),
    ("alize", "al", _M_POSITIVE),
    ("iciti", "ic", _M_POSITIVE),
    ("ical", "ic", _M_POSITIVE),
    ("ful", "", _M_POSITIVE),
    ("ness", "", _M_POSITIVE),
]

_STEP4_RULES = [
    ("al", "", _M_GT_ONE),
    ("ance", "", _M_GT_ONE),
    ("ence", "", _M_GT_ONE),
    ("er", "", _M_GT_ONE),
    ("ic", "", _M_GT_ONE),
    ("able", "", _M_GT_ONE),
    ("ible", "", _M_GT_ONE),
    ("ant", "", _M_GT_ONE),
    ("ement", "", _M_GT_ONE),
    ("ment", "", _M_GT_ONE),
    ("ent", "", _M_GT_ONE),
    ("ion", "", lambda stem: _M_GT_ONE(stem) and stem[-1:] in ("s", "t")),
    ("ou", "", _M_GT_ONE),
    ("ism", "", _M_GT_ONE),
    ("ate", "", _M_GT_ONE),
    ("iti", "", _M_GT_ONE),
    ("ous", "", _M_GT_ONE),
    ("ive", "", _M_GT_ONE),
    ("ize", "", _M_GT_ONE),
]

# longest suffix must win regardless of list order
_STEP2_RULES.sort(key=lambda r: -len(r[0]))
_STEP3_RULES.sort(key=lambda r: -len(r[0]))
_STEP4_RULES.sort(key=lambda r: -len(r[0]))


def _step5a(word):
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1:
            return stem
        if m == 1 and not _ends_cvc(stem):
            return stem
    return word


def _step5b(word):
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        return word[:-1]
    return word


def porter_stem(word):
    """Stem one lowercase word."""
    if len(word) <= 2:
        return word
    word = _step1a(word)
    word = _step1b(word)
    word = _step1c(word)
    word = _apply_rules(word, _STEP2_RULES)
    word = _apply_rules(word, _STEP3_RULES)
    word = _apply_rules(word, _STEP4_RULES)
    word = _step5a(word)
    word = _step5b(word)
    return word
