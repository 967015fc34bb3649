#!/usr/bin/env python3
"""Regenerates the signature manifest for the Go fixture corpus.

Parses every fixture with tree-sitter-go (an independent, grammar-driven Go
parser) and records each top-level function or method declaration that has a
body: name, canonical receiver type (variable stripped, whitespace deleted),
and the 1-based line span of the declaration. Bodyless declarations and
interface method specs yield no entries.

Usage:
    pip install tree-sitter tree-sitter-go
    python3 scripts/gen_parser_manifest.py \
        tests/fixtures/go_corpus tests/fixtures/go_corpus_manifest.json
"""

import json
import pathlib
import sys

import tree_sitter
import tree_sitter_go


def canonical_receiver(receiver_node, src: bytes) -> str:
    # receiver_node is a parameter_list with one parameter_declaration whose
    # `type` child is the receiver type; the variable name is dropped.
    for child in receiver_node.named_children:
        if child.type == "parameter_declaration":
            type_node = child.child_by_field_name("type")
            if type_node is None:
                type_node = child
            text = src[type_node.start_byte:type_node.end_byte].decode()
            return "".join(text.split())
    text = src[receiver_node.start_byte + 1:receiver_node.end_byte - 1].decode()
    return "".join(text.split())


def main() -> int:
    corpus = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/go_corpus")
    out_path = pathlib.Path(
        sys.argv[2] if len(sys.argv) > 2 else "tests/fixtures/go_corpus_manifest.json"
    )

    language = tree_sitter.Language(tree_sitter_go.language())
    parser = tree_sitter.Parser(language)

    manifest = []
    for path in sorted(corpus.glob("*.go")):
        src = path.read_bytes()
        tree = parser.parse(src)
        for node in tree.root_node.children:
            if node.type not in ("function_declaration", "method_declaration"):
                continue
            if node.child_by_field_name("body") is None:
                continue  # assembly-backed / bodyless declaration
            name_node = node.child_by_field_name("name")
            receiver = ""
            if node.type == "method_declaration":
                receiver = canonical_receiver(node.child_by_field_name("receiver"), src)
            manifest.append(
                {
                    "file": path.name,
                    "name": src[name_node.start_byte:name_node.end_byte].decode(),
                    "receiver": receiver,
                    "line_start": node.start_point[0] + 1,
                    "line_end": node.end_point[0] + 1,
                }
            )

    out_path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")
    print(f"{len(manifest)} signatures -> {out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
