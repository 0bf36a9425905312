import sympy as sp
t,s=sp.symbols('t s')
n=2
X=sp.symbols('x1:%d'%(n+1))
allv=(t,s)+X
v=sp.Function('v')(*allv)
l=sp.Function('l')(*allv)
Psi=sp.Function('Psi')(*X)
H=[[None]*n for _ in range(n)]
for j in range(n):
    for k in range(j,n):
        H[j][k]=H[k][j]=sp.Function('h%d%d'%(j,k))(*X)
D=sp.diff
lx=[D(l,X[j]) for j in range(n)]
vx=[D(v,X[j]) for j in range(n)]
lt,ls=D(l,t),D(l,s); vt,vs=D(v,t),D(v,s)
S=lambda f: sum(f(j,k) for j in range(n) for k in range(n))
divhl=S(lambda j,k: D(H[j][k]*lx[j],X[k]))
A=-lt**2-ls**2+S(lambda j,k:H[j][k]*lx[j]*lx[k])+D(l,t,2)+D(l,s,2)-divhl-Psi
Ac2=S(lambda j,k:H[j][k]*lx[j]*lx[k]-D(H[j][k],X[j])*lx[k]-H[j][k]*D(l,X[j],X[k]))-lt**2-ls**2+D(l,t,2)+D(l,s,2)-Psi
print('A diff', sp.simplify(sp.expand(A-Ac2)))
I1=D(v,t,2)+D(v,s,2)-S(lambda j,k:D(H[j][k]*vx[j],X[k]))-A*v
I2=-2*lt*vt-2*ls*vs+2*S(lambda j,k:H[j][k]*lx[j]*vx[k])-Psi*v
def c(j,k):
    r=0
    for jp in range(n):
        for kp in range(n):
            r+=2*H[j][kp]*D(H[jp][k]*lx[jp],X[kp])-D(H[j][k]*H[jp][kp]*lx[jp],X[kp])
    return r+H[j][k]*(D(l,t,2)+D(l,s,2)-Psi)
B=2*(A*Psi-D(A*lt,t)-D(A*ls,s)+S(lambda j,k:D(A*H[j][k]*lx[j],X[k])))
def Vk(k):
    r=0
    for j in range(n):
        for jp in range(n):
            for kp in range(n):
                r+=2*H[j][k]*H[jp][kp]*lx[jp]*vx[j]*vx[kp]-H[j][k]*H[jp][kp]*lx[j]*vx[jp]*vx[kp]
    for j in range(n):
        r+=H[j][k]*A*lx[j]*v**2-Psi*v*H[j][k]*vx[j]-2*(lt*vt+ls*vs)*H[j][k]*vx[j]+H[j][k]*lx[j]*(vt**2+vs**2)
    return r
hv=S(lambda j,k:H[j][k]*vx[j]*vx[k])
M=lt*(vt**2-vs**2+hv)-2*S(lambda j,k:H[j][k]*lx[j]*vx[k])*vt+2*ls*vs*vt+Psi*v*vt-A*lt*v**2
N=ls*(vs**2-vt**2+hv)-2*S(lambda j,k:H[j][k]*lx[j]*vx[k])*vs+2*lt*vs*vt+Psi*v*vs-A*ls*v**2
divV=sum(D(Vk(k),X[k]) for k in range(n))
RHS=2*(D(l,t,2)-D(l,s,2)+divhl+Psi)*vt**2-8*S(lambda j,k:H[j][k]*D(l,t,X[j])*vx[k])*vt+8*D(l,s,t)*vs*vt \
 -8*S(lambda j,k:H[j][k]*D(l,s,X[j])*vx[k])*vs+2*(D(l,s,2)-D(l,t,2)+divhl+Psi)*vs**2 \
 +2*S(lambda j,k:c(j,k)*vx[j]*vx[k])-2*S(lambda j,k:H[j][k]*D(Psi,X[j])*v*vx[k])+B*v**2
res=sp.expand(2*I1*I2+2*divV+2*D(M,t)+2*D(N,s)-RHS)
print(res)
