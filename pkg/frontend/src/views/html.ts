// Tiny HTML helpers; no framework, no client-side reinterpretation of data.

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function hearingLabel(at: number | null): string {
  if (at === null) return "no hearing scheduled";
  return new Date(at).toISOString().replace("T", " ").slice(0, 16);
}

export function shortId(hex: string): string {
  return hex.slice(0, 12);
}

export function errorBanner(error: { code: string; message: string } | null): string {
  if (!error) return "";
  return `<div class="error" data-code="${escapeHtml(error.code)}">` +
    `${escapeHtml(error.code)}: ${escapeHtml(error.message)}</div>`;
}
