import type {
  AnalyzeBody,
  Card,
  CardKind,
  Issue,
  Mutation,
  Report,
  RulesResponse,
  SchemaResponse,
  ValidateResponse,
  WhatIfResponse,
} from './types'

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly issues: Issue[] = [],
  ) {
    super(message)
  }
}

/** Thin client for the /v1 analysis API. */
export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    })
    return this.decode<T>(resp)
  }

  private async decode<T>(resp: Response): Promise<T> {
    const text = await resp.text()
    let doc: unknown = null
    try {
      doc = text ? JSON.parse(text) : null
    } catch {
      /* non-JSON error body */
    }
    if (!resp.ok) {
      const record = (doc ?? {}) as { error?: string; issues?: Issue[] }
      throw new ServiceError(
        resp.status,
        record.error ?? `request failed with ${resp.status}`,
        record.issues ?? [],
      )
    }
    return doc as T
  }

  async health(): Promise<boolean> {
    try {
      const resp = await fetch(this.baseUrl + '/healthz')
      return resp.ok
    } catch {
      return false
    }
  }

  validateCard(card: unknown): Promise<ValidateResponse> {
    return this.post('/v1/validate', card)
  }

  analyze(body: AnalyzeBody): Promise<Report> {
    return this.post('/v1/analyze', body)
  }

  whatIf(body: AnalyzeBody & { mutations: Mutation[] }): Promise<WhatIfResponse> {
    return this.post('/v1/whatif', body)
  }

  async schema(kind: CardKind): Promise<SchemaResponse> {
    const resp = await fetch(`${this.baseUrl}/v1/schema/${kind}`)
    return this.decode<SchemaResponse>(resp)
  }

  async rules(): Promise<RulesResponse> {
    const resp = await fetch(this.baseUrl + '/v1/rules')
    return this.decode<RulesResponse>(resp)
  }
}

export interface ServiceClient {
  health(): Promise<boolean>
  validateCard(card: unknown): Promise<ValidateResponse>
  analyze(body: AnalyzeBody): Promise<Report>
  whatIf(body: AnalyzeBody & { mutations: Mutation[] }): Promise<WhatIfResponse>
  schema(kind: CardKind): Promise<SchemaResponse>
  rules(): Promise<RulesResponse>
}

export type { Card }
