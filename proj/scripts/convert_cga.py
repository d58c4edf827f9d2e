#!/usr/bin/env python3
"""Convert a downloaded ConvoKit "conversations-gone-awry-corpus" directory to
the JSONL schema read by `derail --task paired-wiki`.

Input directory layout (ConvoKit corpus format):
  conversations.json   {conversation_id: {"meta": {"pair_id", "conversation_has_personal_attack", ...}}}
  utterances.jsonl     one utterance per line: {"id", "conversation_id" | "root", "speaker" | "user",
                        "text", "timestamp", "meta": {"is_section_header", ...}}

Output: one conversation per line,
  {"id", "pair_id", "label": "derail" | "healthy", "messages": [{"id", "speaker", "text"}]}
Section headers are dropped and messages are ordered by timestamp.
"""

import argparse
import collections
import json
import pathlib
import sys


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("corpus_dir", type=pathlib.Path)
    ap.add_argument("-o", "--output", type=pathlib.Path, required=True)
    args = ap.parse_args()

    convs = json.loads((args.corpus_dir / "conversations.json").read_text())
    utts = collections.defaultdict(list)
    with open(args.corpus_dir / "utterances.jsonl") as f:
        for line in f:
            u = json.loads(line)
            if u.get("meta", {}).get("is_section_header"):
                continue
            cid = u.get("conversation_id") or u.get("root")
            utts[cid].append(u)

    by_pair = collections.defaultdict(list)
    for cid, c in convs.items():
        meta = c.get("meta", {})
        if "pair_id" not in meta:
            continue
        by_pair[meta["pair_id"]].append(cid)

    written = 0
    with open(args.output, "w") as out:
        for pair_id in sorted(by_pair, key=str):
            members = by_pair[pair_id]
            if len(members) != 2:
                print(f"skipping pair {pair_id}: {len(members)} members", file=sys.stderr)
                continue
            for cid in sorted(members, key=str):
                meta = convs[cid]["meta"]
                msgs = sorted(utts.get(cid, []), key=lambda u: (u.get("timestamp") or 0, u["id"]))
                record = {
                    "id": str(cid),
                    "pair_id": str(pair_id),
                    "label": "derail" if meta.get("conversation_has_personal_attack") else "healthy",
                    "messages": [
                        {"id": str(u["id"]), "speaker": str(u.get("speaker") or u.get("user") or ""),
                         "text": u.get("text", "")}
                        for u in msgs
                    ],
                }
                out.write(json.dumps(record, ensure_ascii=False) + "\n")
                written += 1
    print(f"wrote {written} conversations to {args.output}", file=sys.stderr)


if __name__ == "__main__":
    main()
