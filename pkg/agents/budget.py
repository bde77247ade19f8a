"""
Token budgeting
"""

from ingestion.records import TRUNCATION_MARK
from provider.base import estimate_tokens

CHARS_PER_TOKEN = 4
DEFAULT_TOKEN_BUDGET = 10_000
# " [truncated]" costs at most this many estimated tokens
SUFFIX_ALLOWANCE = estimate_tokens(f" {TRUNCATION_MARK}")


def truncate_to_budget(text: str, budget_tokens: int) -> str:
    """
    Cut text to fit a token budget

    Text within budget is returned unchanged. Otherwise it is cut at
    budget * 4 characters, backed up to the preceding whitespace when the cut
    falls inside a word, and suffixed with the truncation mark.

    Args:
        text: Text to fit
        budget_tokens: Budget (>= 1)

    Returns:
        Text whose estimate is at most budget + SUFFIX_ALLOWANCE
    """
    if budget_tokens < 1:
        raise ValueError(f"budget_tokens must be >= 1, got {budget_tokens}")
    if estimate_tokens(text) <= budget_tokens:
        return text

    limit = budget_tokens * CHARS_PER_TOKEN
    prefix = text[:limit]
    if not text[limit].isspace():
        cut = max(prefix.rfind(" "), prefix.rfind("\n"), prefix.rfind("\t"))
        if cut > 0:
            prefix = prefix[:cut]
    prefix = prefix.rstrip()
    return f"{prefix} {TRUNCATION_MARK}" if prefix else TRUNCATION_MARK
