// Keyboard-first adjudication: working hundreds of candidates is a
// throughput task, so every action has a key.

export type Action =
  | { kind: "decide"; confirmed: boolean }
  | { kind: "toggle-category"; index: number }
  | { kind: "submit" }
  | { kind: "next" }
  | { kind: "previous" }
  | { kind: "play-audio" };

export interface KeyStroke {
  key: string;
  inInput?: boolean; // typing in a text field: ignore hotkeys
  ctrlKey?: boolean;
  metaKey?: boolean;
}

export function mapKey(stroke: KeyStroke): Action | null {
  if (stroke.inInput || stroke.ctrlKey || stroke.metaKey) return null;
  switch (stroke.key) {
    case "c":
      return { kind: "decide", confirmed: true };
    case "x":
      return { kind: "decide", confirmed: false };
    case "Enter":
      return { kind: "submit" };
    case "j":
      return { kind: "next" };
    case "k":
      return { kind: "previous" };
    case "p":
      return { kind: "play-audio" };
    default: {
      if (/^[1-9]$/.test(stroke.key)) {
        return { kind: "toggle-category", index: Number(stroke.key) - 1 };
      }
      return null;
    }
  }
}
