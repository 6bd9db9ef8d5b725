import sys

from memory_store import MemoryStore


def summarize(entry):
    data = entry.get("data") or {}
    status = data.get("status", data.get("label", ""))
    return f"{entry['timestamp']}  {entry['source']:<12} {entry.get('scenario') or '-':<18} {status}"


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    store = MemoryStore(argv[0] if argv else "outputs/run_log.jsonl")
    entries = store.get_all()
    for entry in entries:
        print(summarize(entry))
    return len(entries)


if __name__ == "__main__":
    main()
