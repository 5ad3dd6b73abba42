/** Reviewer name, captured once per browser session. */

const KEY = "ontoext.reviewer";

export function getReviewer(storage: Storage = sessionStorage): string | null {
  return storage.getItem(KEY);
}

export function setReviewer(name: string, storage: Storage = sessionStorage): void {
  storage.setItem(KEY, name.trim());
}

export function ensureReviewer(
  prompter: (message: string) => string | null = (m) => window.prompt(m),
  storage: Storage = sessionStorage,
): string | null {
  const existing = getReviewer(storage);
  if (existing) return existing;
  const entered = prompter("Reviewer name (recorded with every verdict):");
  if (entered && entered.trim()) {
    setReviewer(entered, storage);
    return entered.trim();
  }
  return null;
}
