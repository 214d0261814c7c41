"""In-memory file tree that installation is simulated on."""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .errors import PathConflict


@dataclass
class FileNode:
    name: str
    is_file: bool = False
    children: dict[str, "FileNode"] = field(default_factory=dict)
    digest: str | None = None
    # archive path the leaf's bytes live at; survives renames
    source: str | None = None

    def child(self, name: str) -> "FileNode | None":
        return self.children.get(name)

    def is_dir(self) -> bool:
        return not self.is_file


class VirtualFileTree:
    """Rooted tree of directories and files.

    ``wrapper`` names the single top-level directory of an sdist
    (``name-version/``) when there is one.
    """

    def __init__(self, root: FileNode | None = None, wrapper: str | None = None):
        self.root = root if root is not None else FileNode("")
        self.wrapper = wrapper

    # -- construction --------------------------------------------------------

    @classmethod
    def from_paths(cls, paths, sources: dict[str, str] | None = None) -> "VirtualFileTree":
        tree = cls()
        for p in paths:
            tree.add_file(p, source=(sources or {}).get(p, p))
        return tree

    def add_file(self, path: str, source: str | None = None, digest: str | None = None) -> FileNode:
        parts = [p for p in path.split("/") if p]
        if not parts:
            raise PathConflict(f"empty path {path!r}")
        node = self.root
        for i, part in enumerate(parts[:-1]):
            nxt = node.children.get(part)
            if nxt is None:
                nxt = node.children[part] = FileNode(part)
            elif nxt.is_file:
                raise PathConflict(f"{'/'.join(parts[: i + 1])} is both a file and a directory")
            node = nxt
        leaf_name = parts[-1]
        existing = node.children.get(leaf_name)
        if existing is not None and not existing.is_file:
            raise PathConflict(f"{path} is both a file and a directory")
        leaf = FileNode(leaf_name, is_file=True, digest=digest, source=source if source is not None else path)
        node.children[leaf_name] = leaf
        return leaf

    def add_dir(self, path: str) -> FileNode:
        node = self.root
        for i, part in enumerate(p for p in path.split("/") if p):
            nxt = node.children.get(part)
            if nxt is None:
                nxt = node.children[part] = FileNode(part)
            elif nxt.is_file:
                raise PathConflict(f"{path} is both a file and a directory")
            node = nxt
        return node

    def copy(self) -> "VirtualFileTree":
        return VirtualFileTree(copy.deepcopy(self.root), self.wrapper)

    # -- queries -------------------------------------------------------------

    def get(self, path: str) -> FileNode | None:
        node = self.root
        for part in (p for p in path.split("/") if p):
            if node.is_file:
                return None
            node = node.children.get(part)
            if node is None:
                return None
        return node

    def exists(self, path: str) -> bool:
        return self.get(path) is not None

    def iter_files(self, node: FileNode | None = None, prefix: str = "") -> Iterator[tuple[str, FileNode]]:
        """Depth-first walk yielding ``(path, leaf)`` for every file, children in name order."""
        stack: list[tuple[str, FileNode]] = [(prefix, node or self.root)]
        while stack:
            path, cur = stack.pop()
            if cur.is_file:
                yield path, cur
                continue
            for name in sorted(cur.children, reverse=True):
                child = cur.children[name]
                stack.append((f"{path}/{name}" if path else name, child))

    def iter_dirs_bfs(self, start: str = "") -> Iterator[tuple[str, FileNode]]:
        base = self.get(start)
        if base is None or base.is_file:
            return
        queue: deque[tuple[str, FileNode]] = deque([(start.strip("/"), base)])
        while queue:
            path, cur = queue.popleft()
            yield path, cur
            for name in sorted(cur.children):
                child = cur.children[name]
                if not child.is_file:
                    queue.append((f"{path}/{name}" if path else name, child))

    def file_count(self) -> int:
        return sum(1 for _ in self.iter_files())

    # -- mutation ------------------------------------------------------------

    def remove(self, path: str) -> FileNode | None:
        parts = [p for p in path.split("/") if p]
        if not parts:
            return None
        parent = self.get("/".join(parts[:-1]))
        if parent is None or parent.is_file:
            return None
        return parent.children.pop(parts[-1], None)

    def attach(self, path: str, node: FileNode) -> None:
        """Place ``node`` at ``path``, merging directories that already exist there."""
        parts = [p for p in path.split("/") if p]
        parent = self.add_dir("/".join(parts[:-1])) if len(parts) > 1 else self.root
        node.name = parts[-1]
        existing = parent.children.get(node.name)
        if existing is None:
            parent.children[node.name] = node
            return
        if existing.is_file or node.is_file:
            parent.children[node.name] = node
            return
        for name, child in node.children.items():
            self.attach(f"{path}/{name}", child)

    def subtree(self, path: str) -> "VirtualFileTree":
        node = self.get(path)
        if node is None:
            return VirtualFileTree()
        if node.is_file:
            raise PathConflict(f"{path} is a file")
        return VirtualFileTree(FileNode("", children=copy.deepcopy(node.children)))

    def __repr__(self) -> str:
        return f"VirtualFileTree({[p for p, _ in self.iter_files()]!r})"
