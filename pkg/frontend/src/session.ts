// Login: load the seed into memory, answer the server's challenge, hold the
// read token.  The seed never touches browser storage; mutations are signed
// here and only signed envelopes leave the page.

import { ApiClient, ApiResult, ErrorEnvelope, Receipt } from "./api.js";
import { Envelope, Payload, makeEnvelope } from "./codec.js";
import { Signer } from "./ed25519.js";
import { fromHex, toHex } from "./keccak.js";

export interface ViewSession {
  uid: string;
  role: string;
  token: string;
  api: ApiClient;
  signer: Signer;
}

export async function login(
  api: ApiClient,
  uidHex: string,
  seedHex: string,
): Promise<ApiResult<ViewSession>> {
  const signer = await Signer.fromSeed(fromHex(seedHex));
  const challenge = await api.challenge(uidHex);
  if (!challenge.ok) return challenge;
  const signature = await signer.sign(fromHex(challenge.value.challenge));
  const session = await api.session(uidHex, toHex(signature));
  if (!session.ok) return session;
  api.setToken(session.value.token);
  return {
    ok: true,
    value: { uid: uidHex, role: session.value.role, token: session.value.token, api, signer },
  };
}

/** Sign and submit one transaction; the sender's next nonce is read from the
 * ledger so independent dashboards stay in sync. */
export async function submitSigned(
  session: ViewSession,
  payload: Payload,
): Promise<ApiResult<Receipt & { envelope: Envelope }>> {
  const identity = await session.api.identity(session.uid);
  const nonce = identity.ok ? identity.value.nonce + 1 : 1;
  const envelope = await makeEnvelope(payload, session.uid, nonce, Date.now(), session.signer);
  const result = await session.api.submitTx(envelope);
  if (!result.ok) return result;
  return { ok: true, value: { ...result.value, envelope } };
}

export function describeError(error: ErrorEnvelope): string {
  return `${error.code}: ${error.message}`;
}
