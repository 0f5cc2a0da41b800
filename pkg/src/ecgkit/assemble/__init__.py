"""Chat-template rendering, fixed-length assembly and label masking."""
from .padding import (
    IGNORE_INDEX,
    AssembledSample,
    assemble_latent,
    assemble_tokenized,
    build_labels,
    read_conversations,
    read_samples,
    signal_budget,
    tokenize_segments,
    write_conversations,
    write_samples,
)
from .templates import (
    DEFAULT_SYSTEM_PROMPT,
    SIGNAL_PLACEHOLDER,
    TEMPLATES,
    ChatTemplate,
    Conversation,
    Kind,
    Turn,
    get_template,
    render_segments,
    render_template,
)
from .tokenizer import PAD_TOKEN, TextTokenizer, WhitespaceTokenizer

__all__ = [
    "IGNORE_INDEX", "AssembledSample", "assemble_latent", "assemble_tokenized",
    "build_labels", "read_conversations", "read_samples", "signal_budget",
    "tokenize_segments", "write_conversations", "write_samples",
    "DEFAULT_SYSTEM_PROMPT", "SIGNAL_PLACEHOLDER", "TEMPLATES", "ChatTemplate",
    "Conversation", "Kind", "Turn", "get_template", "render_segments", "render_template",
    "PAD_TOKEN", "TextTokenizer", "WhitespaceTokenizer",
]
