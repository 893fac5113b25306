// Typed client over the service's HTTP/JSON API.  Domain failures are
// returned as the server's error envelope, untouched, so views can surface
// them verbatim.

import type { Envelope } from "./codec.js";

export interface ErrorEnvelope {
  code: string;
  message: string;
}

export interface CaseSummary {
  case_id: string;
  case_type: string;
  case_number: number;
  petitioner_uid: string;
  defendant_uid: string;
  lawyer_uids: string[];
  judge_uid: string;
  status: string;
  next_hearing_at: number | null;
  document_ids: string[];
}

export interface DocumentMeta {
  doc_id: string;
  case_id: string;
  title: string;
  content_hash: string;
  manifest_hash: string;
  size_bytes: number;
  uploader_uid: string;
  uploaded_at_height: number;
  acl: string[];
  custody: { from_uid: string; to_uid: string; at_height: number; note: string }[];
  signatures: { signer_uid: string; signature: string; at_height: number }[];
}

export interface Receipt {
  block_height: number;
  tx_hash: string;
}

export type ApiResult<T> = { ok: true; value: T } | { ok: false; error: ErrorEnvelope };

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
    private token: string | null = null,
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private headers(json = true): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h["Content-Type"] = "application/json";
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    return h;
  }

  private async parse<T>(response: Response): Promise<ApiResult<T>> {
    if (response.ok) {
      return { ok: true, value: (await response.json()) as T };
    }
    let error: ErrorEnvelope;
    try {
      error = (await response.json()) as ErrorEnvelope;
    } catch {
      error = { code: "HTTPError", message: `status ${response.status}` };
    }
    return { ok: false, error };
  }

  private async getJson<T>(path: string): Promise<ApiResult<T>> {
    const response = await this.fetchImpl(this.baseUrl + path, { headers: this.headers(false) });
    return this.parse(response);
  }

  async challenge(uid: string): Promise<ApiResult<{ challenge: string }>> {
    const response = await this.fetchImpl(`${this.baseUrl}/auth/challenge`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({ uid }),
    });
    return this.parse(response);
  }

  async session(uid: string, signature: string): Promise<ApiResult<{ token: string; expires_at: number; role: string }>> {
    const response = await this.fetchImpl(`${this.baseUrl}/auth/session`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({ uid, signature }),
    });
    return this.parse(response);
  }

  async submitTx(envelope: Envelope): Promise<ApiResult<Receipt>> {
    const response = await this.fetchImpl(`${this.baseUrl}/tx`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify(envelope),
    });
    return this.parse(response);
  }

  cases(roleView: "judge" | "lawyer" | "citizen"): Promise<ApiResult<{ cases: CaseSummary[] }>> {
    return this.getJson(`/cases?role_view=${roleView}`);
  }

  search(q: string): Promise<ApiResult<{ cases: CaseSummary[] }>> {
    return this.getJson(`/cases/search?q=${encodeURIComponent(q)}`);
  }

  caseDetail(caseId: string): Promise<ApiResult<CaseSummary>> {
    return this.getJson(`/cases/${caseId}`);
  }

  document(docId: string): Promise<ApiResult<DocumentMeta>> {
    return this.getJson(`/docs/${docId}`);
  }

  async documentContent(docId: string): Promise<ApiResult<Uint8Array>> {
    const response = await this.fetchImpl(`${this.baseUrl}/docs/${docId}/content`, {
      headers: this.headers(false),
    });
    if (response.ok) {
      return { ok: true, value: new Uint8Array(await response.arrayBuffer()) };
    }
    return this.parse(response);
  }

  verify(docId: string, hashHex: string): Promise<ApiResult<{ outcome: string }>> {
    return this.getJson(`/docs/${docId}/verify?hash=${hashHex}`);
  }

  async putChunk(ciphertext: Uint8Array): Promise<ApiResult<{ cipher_hash: string; new: boolean }>> {
    const response = await this.fetchImpl(`${this.baseUrl}/files`, {
      method: "POST",
      headers: this.headers(false),
      body: ciphertext as BodyInit,
    });
    return this.parse(response);
  }

  async putManifest(encoded: Uint8Array): Promise<ApiResult<{ manifest_hash: string }>> {
    const response = await this.fetchImpl(`${this.baseUrl}/manifests`, {
      method: "POST",
      headers: this.headers(false),
      body: encoded as BodyInit,
    });
    return this.parse(response);
  }

  identity(uid: string): Promise<ApiResult<{ uid: string; role: string; nonce: number }>> {
    return this.getJson(`/identities/${uid}`);
  }
}
